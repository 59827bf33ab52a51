//! Descriptive statistics per cuer, per hearing group and overall, in the
//! layout of the reference corpus table, on a synthetic corpus whose hand
//! timing is pure noise around each profile's mean.
//!
//! ```bash
//! cargo run --release --example cuer_statistics
//! ```

use cuesync::measures::{assemble_table, LviConvention};
use cuesync::normalize::{descriptive_stats, normalize_table, stats_to_csv, Grouping, NormPolicy};
use cuesync::synth::{gen_corpus, CuerProfile, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let mut profiles = CuerProfile::table1();
    for p in &mut profiles {
        p.residual_sigma = 1.0;
        p.residual_ar = 0.8;
    }
    let corpus = gen_corpus(&profiles, &GroundTruthModel::null(), 300, 5, &SynthOptions::default())?;
    let table = assemble_table(&corpus.timelines, LviConvention::Backward)?;

    let mut stats = Vec::new();
    for g in [Grouping::PerCuer, Grouping::NormalVsDeaf, Grouping::All] {
        stats.extend(descriptive_stats(&table, g)?);
    }
    print!("{}", stats_to_csv(&stats));

    // after per-cuer z-scoring every cuer has zero mean, unit spread
    let per_cuer = descriptive_stats(&table, Grouping::PerCuer)?;
    let normalized = normalize_table(&table, &per_cuer, NormPolicy::PerCuer)?;
    let z: Vec<f64> = normalized.rows.iter().map(|r| r.norm.unwrap().hpt_z).collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    println!("mean z-scored HPT over {} rows: {mean:.2e}", z.len());
    Ok(())
}
