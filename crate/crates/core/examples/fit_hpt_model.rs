//! Fit the piecewise LVE regression and the LVI/LVD regressions on a
//! synthetic corpus and compare them with the generating coefficients.
//!
//! ```bash
//! cargo run --release --example fit_hpt_model
//! ```

use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{normalize_table, GroupStats, NormPolicy};
use cuesync::regression::{fit_predictor, F1F2Estimator, FitOptions, LinearModel, Subset, Variant};
use cuesync::synth::{gen_corpus, CuerProfile, GroundTruthModel, SynthOptions};

fn show(name: &str, fit: &LinearModel, truth: &LinearModel) {
    println!(
        "{name:>8}: slope {:+.3} ± {:.3} (true {:+.3})  intercept {:+.3} ± {:.3} (true {:+.3})",
        fit.slope, fit.slope_se, truth.slope, fit.intercept, fit.intercept_se, truth.intercept
    );
}

fn main() -> cuesync::Result<()> {
    let profiles = CuerProfile::table1();
    let model = GroundTruthModel::default_normal();
    let corpus = gen_corpus(&profiles, &model, 400, 9, &SynthOptions::default())?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;

    // the generator normalized with the profiles' own statistics
    let stats: Vec<GroupStats> = profiles.iter().map(CuerProfile::true_stats).collect();
    let normalized = normalize_table(&table, &stats, NormPolicy::PerCuer)?;

    for estimator in [F1F2Estimator::Marginal, F1F2Estimator::Joint] {
        let opts = FitOptions {
            estimator,
            ..FitOptions::default()
        };
        let p = fit_predictor(&normalized, Subset::All, Variant::Combined, &opts)?;
        println!("{estimator:?} estimator, {} rows", table.len());
        let f0 = p.f0.as_ref().unwrap();
        show("f0.left", &f0.left, &model.f0_left);
        show("f1", p.f1.as_ref().unwrap(), &model.f1);
        show("f2", p.f2.as_ref().unwrap(), &model.f2);
    }
    Ok(())
}
