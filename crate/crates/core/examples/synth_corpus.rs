//! Generate a small synthetic corpus and write every artifact the pipeline
//! reads: canonical sentences, truth table, landmark tracks and TextGrid/EAF
//! renderings.
//!
//! ```bash
//! cargo run --example synth_corpus -- /tmp/cuesync-demo
//! ```

use std::fs;
use std::path::PathBuf;

use cuesync::annot_io::{write_corpus, write_landmarks};
use cuesync::synth::{gen_corpus, timeline_eaf, timeline_textgrid, truth_to_csv, CuerProfile, GroundTruthModel, SynthOptions};

fn main() -> cuesync::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "synth-out".into()).into();
    let opts = SynthOptions {
        ms_grid: true,
        ..SynthOptions::default()
    };
    let corpus = gen_corpus(&CuerProfile::table1(), &GroundTruthModel::default_normal(), 10, 42, &opts)?;

    fs::create_dir_all(out.join("tracks"))?;
    fs::create_dir_all(out.join("annotations"))?;
    fs::write(out.join("corpus.jsonl"), write_corpus(&corpus.timelines))?;
    fs::write(out.join("truth.csv"), truth_to_csv(&corpus.truth))?;
    for (t, track) in corpus.timelines.iter().zip(&corpus.tracks) {
        let stem = format!("{}__{}", t.cuer_id, t.sentence_id);
        fs::write(out.join("tracks").join(format!("{stem}.csv")), write_landmarks(track))?;
        fs::write(out.join("annotations").join(format!("{stem}.TextGrid")), timeline_textgrid(t))?;
        fs::write(out.join("annotations").join(format!("{stem}.eaf")), timeline_eaf(t))?;
    }
    println!(
        "{} sentences, {} vowels, {} redraws -> {}",
        corpus.timelines.len(),
        corpus.truth.len(),
        corpus.rejected,
        out.display()
    );
    Ok(())
}
