//! Canonical sentence interchange: one JSON object per line.
//!
//! ```text
//! {"sentence_id":"s1","cuer_id":"NF1","hearing":"normal","sentence_end_s":0.900000,
//!  "vowels":[{"label":"a","lip_start_s":0.100000,"lip_end_s":0.300000,"hand_start_s":0.000000,"hand_end_s":0.200000}]}
//! ```
//! (shown wrapped; the real document is a single line). Seconds are written
//! with the shortest round-trip representation and at least six decimals.

use serde::Deserialize;

use super::{fmt_seconds, Hearing, PhoneInterval, SentenceTimeline};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSentence {
    sentence_id: String,
    cuer_id: String,
    hearing: String,
    sentence_end_s: f64,
    vowels: Vec<RawVowel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVowel {
    label: String,
    lip_start_s: f64,
    lip_end_s: f64,
    hand_start_s: f64,
    hand_end_s: f64,
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Serializes one timeline as a single JSON line (no trailing newline).
pub fn write_canonical(timeline: &SentenceTimeline) -> String {
    let vowels: Vec<String> = timeline
        .lip_vowels
        .iter()
        .zip(&timeline.hand_vowels)
        .map(|(lip, hand)| {
            format!(
                "{{\"label\":{},\"lip_start_s\":{},\"lip_end_s\":{},\"hand_start_s\":{},\"hand_end_s\":{}}}",
                json_str(&lip.label),
                fmt_seconds(lip.start),
                fmt_seconds(lip.end),
                fmt_seconds(hand.start),
                fmt_seconds(hand.end)
            )
        })
        .collect();
    format!(
        "{{\"sentence_id\":{},\"cuer_id\":{},\"hearing\":\"{}\",\"sentence_end_s\":{},\"vowels\":[{}]}}",
        json_str(&timeline.sentence_id),
        json_str(&timeline.cuer_id),
        timeline.hearing,
        fmt_seconds(timeline.sentence_end),
        vowels.join(",")
    )
}

/// Parses one canonical JSON document and validates the timeline invariants.
pub fn read_canonical(text: &str) -> Result<SentenceTimeline> {
    let raw: RawSentence =
        serde_json::from_str(text.trim()).map_err(|e| Error::SchemaViolation(e.to_string()))?;
    let hearing: Hearing = raw.hearing.parse()?;
    let mut lip_vowels = Vec::with_capacity(raw.vowels.len());
    let mut hand_vowels = Vec::with_capacity(raw.vowels.len());
    for v in raw.vowels {
        lip_vowels.push(PhoneInterval {
            start: v.lip_start_s,
            end: v.lip_end_s,
            label: v.label.clone(),
        });
        hand_vowels.push(PhoneInterval {
            start: v.hand_start_s,
            end: v.hand_end_s,
            label: v.label,
        });
    }
    let timeline = SentenceTimeline {
        sentence_id: raw.sentence_id,
        cuer_id: raw.cuer_id,
        hearing,
        lip_vowels,
        hand_vowels,
        sentence_end: raw.sentence_end_s,
    };
    timeline
        .validate()
        .map_err(|e| Error::SchemaViolation(format!("invalid timeline: {e}")))?;
    Ok(timeline)
}

/// One sentence per line, `\n`-terminated.
pub fn write_corpus(timelines: &[SentenceTimeline]) -> String {
    let mut out = String::new();
    for t in timelines {
        out.push_str(&write_canonical(t));
        out.push('\n');
    }
    out
}

/// Reads a line-oriented corpus; blank lines and `#` metadata lines are skipped.
pub fn read_corpus(text: &str) -> Result<Vec<SentenceTimeline>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, l)| {
            read_canonical(l).map_err(|e| match e {
                Error::SchemaViolation(m) => Error::SchemaViolation(format!("line {}: {m}", n + 1)),
                other => other,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SentenceTimeline {
        SentenceTimeline {
            sentence_id: "s\"1".into(),
            cuer_id: "NF1".into(),
            hearing: Hearing::Deaf,
            lip_vowels: vec![
                PhoneInterval::new(0.1, 0.30000000000000004, "a").unwrap(),
                PhoneInterval::new(0.4, 0.6, "ü").unwrap(),
            ],
            hand_vowels: vec![
                PhoneInterval::new(0.0, 0.2, "a").unwrap(),
                PhoneInterval::new(0.25, 0.5, "ü").unwrap(),
            ],
            sentence_end: 0.6,
        }
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let text = write_canonical(&t);
        assert!(!text.contains('\n'));
        assert!(text.contains("\"sentence_end_s\":0.600000"));
        assert_eq!(read_canonical(&text).unwrap(), t);
        assert_eq!(write_canonical(&read_canonical(&text).unwrap()), text);
    }

    #[test]
    fn missing_hearing_is_schema_violation() {
        let text = write_canonical(&sample()).replace("\"hearing\":\"deaf\",", "");
        assert!(matches!(read_canonical(&text), Err(Error::SchemaViolation(_))));
    }

    #[test]
    fn bad_hearing_and_invalid_timeline() {
        let text = write_canonical(&sample()).replace("\"deaf\"", "\"partial\"");
        assert!(matches!(read_canonical(&text), Err(Error::SchemaViolation(_))));
        let text = write_canonical(&sample()).replace("\"sentence_end_s\":0.600000", "\"sentence_end_s\":0.5");
        assert!(matches!(read_canonical(&text), Err(Error::SchemaViolation(_))));
    }

    #[test]
    fn corpus_skips_metadata() {
        let text = format!("# config_hash=00\n{}", write_corpus(&[sample(), sample()]));
        assert_eq!(read_corpus(&text).unwrap().len(), 2);
    }
}
