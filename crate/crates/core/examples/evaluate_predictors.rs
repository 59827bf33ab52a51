//! Held-out comparison of the four predictors and ground truth: normalized
//! HPT error, hand-coordinate distance and position accuracy.
//!
//! ```bash
//! cargo run --release --example evaluate_predictors
//! ```

use cuesync::annot_io::Sampling;
use cuesync::evaluate::{
    compare_predictors, split_sentences, EvalOptions, NamedPredictor, PositionMap, PredictionSource, TrackSet,
};
use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{NormContext, NormPolicy, normalize_table};
use cuesync::regression::{fit_predictor, FitOptions, HptPredictor, Subset, Variant};
use cuesync::synth::{gen_corpus, CuerProfile, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let corpus = gen_corpus(
        &CuerProfile::table1(),
        &GroundTruthModel::default_normal(),
        200,
        4,
        &SynthOptions::default(),
    )?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;
    let tracks: TrackSet = corpus
        .timelines
        .iter()
        .zip(corpus.tracks)
        .map(|(t, tr)| ((t.cuer_id.clone(), t.sentence_id.clone()), tr))
        .collect();

    let split = split_sentences(&table, (4, 1), 0)?;
    let train = split.train_table(&table);
    let ctx = NormContext::fit(&train, NormPolicy::PerCuer)?;
    let train = normalize_table(&train, &ctx.groups, ctx.policy)?;

    let predictors: Vec<HptPredictor> = [Variant::Combined, Variant::LveOnly, Variant::MeanBased, Variant::AudioBased]
        .into_iter()
        .map(|v| fit_predictor(&train, Subset::All, v, &FitOptions::default()))
        .collect::<cuesync::Result<_>>()?;
    let ids: Vec<String> = predictors.iter().map(HptPredictor::id).collect();
    let mut named = vec![NamedPredictor {
        id: "GT",
        source: PredictionSource::GroundTruth,
    }];
    for (p, id) in predictors.iter().zip(&ids) {
        named.push(NamedPredictor {
            id,
            source: PredictionSource::Fitted(p),
        });
    }

    let positions = PositionMap::default();
    let opts = EvalOptions {
        sampling: Sampling::Nearest,
        positions: &positions,
        eval_subset: Subset::All,
    };
    println!("{:<20} {:>8} {:>9} {:>9}", "predictor", "e_hpt", "d_hpt_px", "accuracy");
    for r in compare_predictors(&table, &named, &tracks, &split, &opts)? {
        println!(
            "{:<20} {:>8.4} {:>9.2} {:>9.4}",
            r.predictor_id, r.e_hpt, r.d_hpt_px, r.position_accuracy
        );
    }
    Ok(())
}
