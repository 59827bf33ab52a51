//! Regressions fit on all cuers, on hearing cuers only and on deaf cuers
//! only, each scored on every evaluation subset.
//!
//! ```bash
//! cargo run --release --example subset_regressions
//! ```

use cuesync::annot_io::Hearing;
use cuesync::evaluate::{mse_matrix, mse_matrix_to_csv, split_sentences};
use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{normalize_table, NormContext, NormPolicy};
use cuesync::regression::{fit_predictor, FitOptions, Subset, Variant};
use cuesync::synth::{gen_corpus, CuerProfile, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let mut profiles = CuerProfile::table1();
    for p in &mut profiles {
        if p.hearing == Hearing::Deaf {
            p.model = Some(GroundTruthModel::default_deaf());
            p.sentences = Some(200);
        } else {
            p.sentences = Some(400);
        }
    }
    let corpus = gen_corpus(&profiles, &GroundTruthModel::default_normal(), 0, 8, &SynthOptions::default())?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;
    let split = split_sentences(&table, (4, 1), 0)?;
    let train = split.train_table(&table);
    let ctx = NormContext::fit(&train, NormPolicy::PerCuer)?;
    let train = normalize_table(&train, &ctx.groups, ctx.policy)?;

    let predictors = [Subset::All, Subset::Normal, Subset::Deaf]
        .into_iter()
        .map(|s| fit_predictor(&train, s, Variant::Combined, &FitOptions::default()))
        .collect::<cuesync::Result<Vec<_>>>()?;
    print!("{}", mse_matrix_to_csv(&mse_matrix(&table, &predictors, &split)?));
    Ok(())
}
