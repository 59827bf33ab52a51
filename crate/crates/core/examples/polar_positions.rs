//! Hand positions in polar coordinates around the lip center, and the
//! nearest-centroid position classifier at true and shifted instants.
//!
//! ```bash
//! cargo run --release --example polar_positions
//! ```

use cuesync::annot_io::Sampling;
use cuesync::evaluate::{centroid_position_classifier, polar_samples, split_sentences, PositionMap, PredictionSource, TrackSet};
use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{normalize_table, NormContext, NormPolicy};
use cuesync::regression::{fit_predictor, FitOptions, Subset, Variant};
use cuesync::synth::{gen_corpus, CuerProfile, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let corpus = gen_corpus(&CuerProfile::table1(), &GroundTruthModel::default_normal(), 100, 6, &SynthOptions::default())?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;
    let tracks: TrackSet = corpus
        .timelines
        .iter()
        .zip(corpus.tracks)
        .map(|(t, tr)| ((t.cuer_id.clone(), t.sentence_id.clone()), tr))
        .collect();
    let split = split_sentences(&table, (4, 1), 0)?;
    let positions = PositionMap::default();

    let gt = |keep: &dyn Fn(&_) -> bool| {
        polar_samples(&table, PredictionSource::GroundTruth, &tracks, keep, &positions, Sampling::Nearest)
    };
    let train: Vec<_> = gt(&|r| split.is_train(r))?.into_iter().map(|(_, s)| s).collect();
    let test: Vec<_> = gt(&|r| split.is_test(r))?.into_iter().map(|(_, s)| s).collect();

    // class centroids in (r, theta)
    for class in 1..=5u8 {
        let pts: Vec<_> = train.iter().filter(|s| s.position_class == class).collect();
        let r = pts.iter().map(|s| s.r).sum::<f64>() / pts.len() as f64;
        let th = pts.iter().map(|s| s.theta).sum::<f64>() / pts.len() as f64;
        println!("position {class}: r {r:6.1} px  theta {th:+.2} rad  ({} samples)", pts.len());
    }
    println!("accuracy at ground-truth instants: {:.4}", centroid_position_classifier(&train, &test)?);

    let tr = split.train_table(&table);
    let ctx = NormContext::fit(&tr, NormPolicy::PerCuer)?;
    let tr = normalize_table(&tr, &ctx.groups, ctx.policy)?;
    for v in [Variant::Combined, Variant::AudioBased] {
        let p = fit_predictor(&tr, Subset::All, v, &FitOptions::default())?;
        let shifted: Vec<_> = polar_samples(&table, PredictionSource::Fitted(&p), &tracks, |r| split.is_test(r), &positions, Sampling::Nearest)?
            .into_iter()
            .map(|(_, s)| s)
            .collect();
        println!("accuracy at {} instants: {:.4}", p.id(), centroid_position_classifier(&train, &shifted)?);
    }
    Ok(())
}
