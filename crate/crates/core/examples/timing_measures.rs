//! Per-vowel timing measures of one sentence: hand preceding time, time to
//! sentence end, inter-vowel interval and vowel duration.
//!
//! ```bash
//! cargo run --example timing_measures
//! ```

use cuesync::annot_io::{Hearing, PhoneInterval, SentenceTimeline};
use cuesync::measures::{compute_measures, LviConvention};

fn iv(start: f64, end: f64, label: &str) -> PhoneInterval {
    PhoneInterval::new(start, end, label).unwrap()
}

fn main() -> cuesync::Result<()> {
    let timeline = SentenceTimeline {
        sentence_id: "demo".into(),
        cuer_id: "NF1".into(),
        hearing: Hearing::Normal,
        lip_vowels: vec![iv(0.2, 0.5, "a"), iv(0.7, 1.1, "i"), iv(1.3, 1.6, "u")],
        hand_vowels: vec![iv(0.0, 0.3, "a"), iv(0.4, 0.8, "i"), iv(1.0, 1.4, "u")],
        sentence_end: 1.6,
    };
    timeline.validate()?;

    for convention in [LviConvention::Backward, LviConvention::Forward] {
        println!("{convention:?}");
        println!("  label    hpt    lve    lvi    lvd  source");
        for m in compute_measures(&timeline, convention)? {
            println!(
                "  {:>5} {:.3} {:.3} {:.3} {:.3}  {}",
                m.label, m.hpt, m.lve, m.lvi, m.lvd, m.lvi_source
            );
        }
    }
    Ok(())
}
