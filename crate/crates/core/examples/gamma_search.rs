//! Grid search for the LVE breakpoint by total residual error of the two
//! pieces. The default breakpoint stays fixed unless this is run.
//!
//! ```bash
//! cargo run --release --example gamma_search
//! ```

use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{NormContext, NormPolicy};
use cuesync::regression::{fit_f0, grid_search_gamma, LinearModel};
use cuesync::synth::{gen_corpus, CuerProfile, GenerativeForm, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let model = GroundTruthModel {
        gamma: -0.5,
        f0_left: LinearModel::line(2.0, 0.6),
        f0_right: LinearModel::line(0.2, 0.3),
        form: GenerativeForm::LveOnly,
        ..GroundTruthModel::default_normal()
    };
    let corpus = gen_corpus(&CuerProfile::table1(), &model, 300, 2, &SynthOptions::default())?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;
    let ctx = NormContext::fit(&table, NormPolicy::PerCuer)?;
    let normalized = cuesync::normalize::normalize_table(&table, &ctx.groups, ctx.policy)?;

    let (gamma, mse) = grid_search_gamma(&normalized.rows)?;
    println!("best gamma {gamma:.2} (generated with {:.2}), residual mse {mse:.4}", model.gamma);
    for g in [-0.7, -0.5, -0.34, -0.2] {
        let f0 = fit_f0(&normalized.rows, g)?;
        println!("gamma {g:+.2}: residual mse {:.4}", f0.residual_mse());
    }
    Ok(())
}
