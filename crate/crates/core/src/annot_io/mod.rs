//! Annotation ingestion: Praat TextGrid (acoustic/lip stream), ELAN EAF
//! (hand stream), landmark CSV tracks and the canonical per-sentence JSON
//! interchange format.
//!
//! Parsers are pure functions of their input text. Tiers produced by
//! [`parse_textgrid`] are tagged [`Stream::Lip`], tiers produced by
//! [`parse_eaf`] are tagged [`Stream::Hand`]; [`align_tiers`] pairs one of
//! each into a [`SentenceTimeline`].

mod canonical;
mod eaf;
mod landmarks;
mod textgrid;

pub use canonical::{read_canonical, read_corpus, write_canonical, write_corpus};
pub use eaf::{parse_eaf, write_eaf};
pub use landmarks::{read_landmarks, write_landmarks, Frame, HandTrack, Point, Sampling};
pub use textgrid::{parse_textgrid, write_textgrid};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labelled segment of an annotation tier, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhoneInterval {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

impl PhoneInterval {
    /// Builds an interval, trimming the label. Fails when `start >= end`,
    /// `start < 0` or the trimmed label is empty.
    pub fn new(start: f64, end: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into().trim().to_string();
        if label.is_empty() {
            return Err(Error::InvalidTimeline("empty interval label".into()));
        }
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || start >= end {
            return Err(Error::InvalidTimeline(format!(
                "interval '{label}' has invalid bounds [{start}, {end}]"
            )));
        }
        Ok(PhoneInterval { start, end, label })
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stream {
    Lip,
    Hand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hearing {
    Normal,
    Deaf,
}

impl Hearing {
    pub fn as_str(self) -> &'static str {
        match self {
            Hearing::Normal => "normal",
            Hearing::Deaf => "deaf",
        }
    }
}

impl fmt::Display for Hearing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hearing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(Hearing::Normal),
            "deaf" => Ok(Hearing::Deaf),
            other => Err(Error::SchemaViolation(format!("unknown hearing value '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationTier {
    pub tier_name: String,
    pub stream: Stream,
    pub intervals: Vec<PhoneInterval>,
}

impl AnnotationTier {
    /// Checks that intervals are sorted by start and pairwise non-overlapping.
    pub fn check_order(&self) -> Result<()> {
        check_ordered(&self.tier_name, &self.intervals)
    }
}

fn check_ordered(tier: &str, intervals: &[PhoneInterval]) -> Result<()> {
    for (k, iv) in intervals.iter().enumerate() {
        if iv.end <= iv.start {
            return Err(Error::NonmonotonicIntervals {
                tier: tier.to_string(),
                index: k,
                detail: format!("end {} <= start {}", iv.end, iv.start),
            });
        }
        if k > 0 && intervals[k - 1].end > iv.start {
            return Err(Error::NonmonotonicIntervals {
                tier: tier.to_string(),
                index: k,
                detail: format!(
                    "starts at {} before previous interval ends at {}",
                    iv.start,
                    intervals[k - 1].end
                ),
            });
        }
    }
    Ok(())
}

/// Identity of one sentence recording.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceMeta {
    pub sentence_id: String,
    pub cuer_id: String,
    pub hearing: Hearing,
}

/// One sentence's paired lip and hand vowel intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceTimeline {
    pub sentence_id: String,
    pub cuer_id: String,
    pub hearing: Hearing,
    pub lip_vowels: Vec<PhoneInterval>,
    pub hand_vowels: Vec<PhoneInterval>,
    pub sentence_end: f64,
}

impl SentenceTimeline {
    pub fn len(&self) -> usize {
        self.lip_vowels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lip_vowels.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lip_vowels.len();
        if n == 0 {
            return Err(Error::InvalidTimeline(format!(
                "sentence '{}' has no vowels",
                self.sentence_id
            )));
        }
        if self.hand_vowels.len() != n {
            return Err(Error::CountMismatch {
                lip: n,
                hand: self.hand_vowels.len(),
            });
        }
        for (i, (lip, hand)) in self.lip_vowels.iter().zip(&self.hand_vowels).enumerate() {
            if lip.label != hand.label {
                return Err(Error::LabelMismatch {
                    index: i,
                    lip: lip.label.clone(),
                    hand: hand.label.clone(),
                });
            }
            for iv in [lip, hand] {
                if iv.label.trim().is_empty() || iv.start < 0.0 {
                    return Err(Error::InvalidTimeline(format!(
                        "sentence '{}' vowel {i} has an invalid interval",
                        self.sentence_id
                    )));
                }
            }
        }
        check_ordered("lip", &self.lip_vowels)?;
        check_ordered("hand", &self.hand_vowels)?;
        let last_end = self.lip_vowels[n - 1].end;
        if !(self.sentence_end >= last_end) {
            return Err(Error::InvalidTimeline(format!(
                "sentence '{}' ends at {} before its last lip vowel ({last_end})",
                self.sentence_id, self.sentence_end
            )));
        }
        Ok(())
    }

    /// True when some hand interval extends past the sentence end.
    pub fn hand_overruns_end(&self) -> bool {
        self.hand_vowels.iter().any(|h| h.end > self.sentence_end)
    }
}

/// The 16 Mandarin finals of the Cued Speech system (`v` stands for ü).
pub const DEFAULT_VOWELS: [&str; 16] = [
    "a", "o", "e", "i", "u", "v", "ai", "ei", "ao", "ou", "an", "en", "ang", "eng", "ong", "er",
];

/// Vowel label filter applied to tiers before alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VowelSet {
    labels: BTreeSet<String>,
}

impl Default for VowelSet {
    fn default() -> Self {
        VowelSet::new(DEFAULT_VOWELS.iter().copied())
    }
}

impl VowelSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        VowelSet {
            labels: labels.into_iter().map(|s| s.as_ref().trim().to_string()).collect(),
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label.trim())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// Keeps only vowel intervals; returns the filtered tier and the number
    /// of dropped (non-vowel) intervals.
    pub fn filter(&self, tier: &AnnotationTier) -> (AnnotationTier, usize) {
        let intervals: Vec<_> = tier
            .intervals
            .iter()
            .filter(|iv| self.contains(&iv.label))
            .cloned()
            .collect();
        let dropped = tier.intervals.len() - intervals.len();
        (
            AnnotationTier {
                tier_name: tier.tier_name.clone(),
                stream: tier.stream,
                intervals,
            },
            dropped,
        )
    }
}

/// Pairs a vowel-filtered lip tier with a vowel-filtered hand tier.
///
/// Count or label disagreements are annotation defects and are reported,
/// never repaired.
pub fn align_tiers(
    lip: &AnnotationTier,
    hand: &AnnotationTier,
    meta: &SentenceMeta,
) -> Result<SentenceTimeline> {
    if lip.stream != Stream::Lip || hand.stream != Stream::Hand {
        return Err(Error::InvalidTimeline(format!(
            "expected (Lip, Hand) tiers, got ({:?}, {:?})",
            lip.stream, hand.stream
        )));
    }
    lip.check_order()?;
    hand.check_order()?;
    let (nl, nh) = (lip.intervals.len(), hand.intervals.len());
    if nl != nh {
        return Err(Error::CountMismatch { lip: nl, hand: nh });
    }
    let sentence_end = lip
        .intervals
        .last()
        .map(|iv| iv.end)
        .ok_or_else(|| Error::InvalidTimeline(format!("sentence '{}' has no vowels", meta.sentence_id)))?;
    let timeline = SentenceTimeline {
        sentence_id: meta.sentence_id.clone(),
        cuer_id: meta.cuer_id.clone(),
        hearing: meta.hearing,
        lip_vowels: lip.intervals.clone(),
        hand_vowels: hand.intervals.clone(),
        sentence_end,
    };
    timeline.validate()?;
    Ok(timeline)
}

/// Sentences dropped by [`align_batch`], with the reason.
#[derive(Debug, Default)]
pub struct AlignReport {
    pub excluded: Vec<(SentenceMeta, Error)>,
}

impl AlignReport {
    pub fn excluded_count(&self) -> usize {
        self.excluded.len()
    }
}

/// Aligns many tier pairs. Count and label mismatches exclude the sentence
/// and are counted in the report; any other error aborts.
pub fn align_batch<'a, I>(pairs: I) -> Result<(Vec<SentenceTimeline>, AlignReport)>
where
    I: IntoIterator<Item = (&'a AnnotationTier, &'a AnnotationTier, SentenceMeta)>,
{
    let mut kept = Vec::new();
    let mut report = AlignReport::default();
    for (lip, hand, meta) in pairs {
        match align_tiers(lip, hand, &meta) {
            Ok(t) => kept.push(t),
            Err(e @ (Error::CountMismatch { .. } | Error::LabelMismatch { .. })) => report.excluded.push((meta, e)),
            Err(e) => return Err(e),
        }
    }
    Ok((kept, report))
}

/// Formats seconds with the shortest round-trip representation, padded to
/// at least six decimal digits.
pub(crate) fn fmt_seconds(x: f64) -> String {
    let mut s = format!("{x}");
    match s.find('.') {
        Some(dot) => {
            let decimals = s.len() - dot - 1;
            for _ in decimals..6 {
                s.push('0');
            }
        }
        None => s.push_str(".000000"),
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tier(stream: Stream, spec: &[(f64, f64, &str)]) -> AnnotationTier {
        AnnotationTier {
            tier_name: "t".into(),
            stream,
            intervals: spec
                .iter()
                .map(|&(s, e, l)| PhoneInterval::new(s, e, l).unwrap())
                .collect(),
        }
    }

    fn meta() -> SentenceMeta {
        SentenceMeta {
            sentence_id: "s1".into(),
            cuer_id: "NF1".into(),
            hearing: Hearing::Normal,
        }
    }

    #[test]
    fn align_happy_path() {
        let lip = tier(Stream::Lip, &[(0.1, 0.3, "a"), (0.4, 0.6, "i"), (0.7, 0.9, "u")]);
        let hand = tier(Stream::Hand, &[(0.0, 0.2, "a"), (0.25, 0.45, "i"), (0.5, 0.8, "u")]);
        let t = align_tiers(&lip, &hand, &meta()).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.sentence_end, 0.9);
    }

    #[test]
    fn align_count_mismatch() {
        let lip = tier(Stream::Lip, &[(0.1, 0.3, "a"), (0.4, 0.6, "i"), (0.7, 0.9, "u")]);
        let hand = tier(Stream::Hand, &[(0.0, 0.2, "a"), (0.25, 0.45, "i")]);
        assert!(matches!(
            align_tiers(&lip, &hand, &meta()),
            Err(Error::CountMismatch { lip: 3, hand: 2 })
        ));
    }

    #[test]
    fn align_label_mismatch_reports_index() {
        let lip = tier(Stream::Lip, &[(0.1, 0.3, "a"), (0.4, 0.6, "i"), (0.7, 0.9, "u")]);
        let hand = tier(Stream::Hand, &[(0.0, 0.2, "a"), (0.25, 0.45, "u"), (0.5, 0.8, "i")]);
        match align_tiers(&lip, &hand, &meta()) {
            Err(Error::LabelMismatch { index, lip, hand }) => {
                assert_eq!((index, lip.as_str(), hand.as_str()), (1, "i", "u"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn batch_excludes_and_counts_misaligned() {
        let lip = tier(Stream::Lip, &[(0.1, 0.3, "a"), (0.4, 0.6, "i")]);
        let good = tier(Stream::Hand, &[(0.0, 0.2, "a"), (0.25, 0.45, "i")]);
        let short = tier(Stream::Hand, &[(0.0, 0.2, "a")]);
        let with_id = |id: &str| SentenceMeta { sentence_id: id.into(), ..meta() };
        let (kept, report) =
            align_batch([(&lip, &good, with_id("s1")), (&lip, &short, with_id("s2")), (&lip, &good, with_id("s3"))])
                .unwrap();
        assert_eq!(kept.iter().map(|t| t.sentence_id.as_str()).collect::<Vec<_>>(), ["s1", "s3"]);
        assert_eq!(report.excluded_count(), 1);
        assert_eq!(report.excluded[0].0.sentence_id, "s2");
        assert!(align_batch([(&lip, &lip, meta())]).is_err());
    }

    #[test]
    fn align_rejects_swapped_streams() {
        let lip = tier(Stream::Lip, &[(0.1, 0.3, "a")]);
        assert!(align_tiers(&lip, &lip, &meta()).is_err());
    }

    #[test]
    fn vowel_filter_counts_dropped() {
        let t = tier(Stream::Lip, &[(0.0, 0.1, "b"), (0.1, 0.3, "a"), (0.3, 0.4, "zh"), (0.4, 0.6, "ang")]);
        let (f, dropped) = VowelSet::default().filter(&t);
        assert_eq!(dropped, 2);
        assert_eq!(f.intervals.iter().map(|i| i.label.as_str()).collect::<Vec<_>>(), ["a", "ang"]);
    }

    #[test]
    fn interval_validation() {
        assert!(PhoneInterval::new(0.3, 0.3, "a").is_err());
        assert!(PhoneInterval::new(0.0, 0.3, "  ").is_err());
        assert_eq!(PhoneInterval::new(0.0, 0.3, " a ").unwrap().label, "a");
    }

    #[test]
    fn seconds_format_pads_to_six_decimals() {
        assert_eq!(fmt_seconds(1.0), "1.000000");
        assert_eq!(fmt_seconds(0.35), "0.350000");
        assert_eq!(fmt_seconds(0.1 + 0.2), "0.30000000000000004");
        assert_eq!(fmt_seconds(1.0e-7), "0.0000001");
    }
}
