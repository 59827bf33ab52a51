//! Per-vowel timing measures.
//!
//! For vowel `i` of a sentence with lip interval `[s_i, e_i]` and hand
//! interval `[S_i, E_i]`:
//!
//! * lip target `t_i = (s_i + e_i) / 2`, hand target `T_i = (S_i + E_i) / 2`
//! * hand preceding time `hpt = t_i - T_i`
//! * lip vowel to end `lve = sentence_end - t_i`
//! * lip vowel interval `lvi = t_i - t_{i-1}` (backward convention)
//! * lip vowel duration `lvd = e_i - s_i`
//!
//! The boundary syllable without a neighbour takes the sentence maximum of
//! the measured intervals; a one-vowel sentence uses its duration.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annot_io::{Hearing, PhoneInterval, SentenceTimeline};
use crate::error::{Error, Result};
use crate::normalize::NormContext;

pub fn midpoint(interval: &PhoneInterval) -> f64 {
    (interval.start + interval.end) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LviConvention {
    /// `lvi_i = t_i - t_{i-1}`; the first syllable is imputed.
    #[default]
    Backward,
    /// `lvi_i = t_{i+1} - t_i`; the last syllable is imputed.
    Forward,
}

impl FromStr for LviConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward" => Ok(LviConvention::Backward),
            "forward" => Ok(LviConvention::Forward),
            other => Err(Error::UsageError(format!("unknown lvi convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LviSource {
    Measured,
    ImputedMax,
    ImputedSingleton,
}

impl fmt::Display for LviSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LviSource::Measured => "measured",
            LviSource::ImputedMax => "imputed_max",
            LviSource::ImputedSingleton => "imputed_singleton",
        })
    }
}

impl FromStr for LviSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measured" => Ok(LviSource::Measured),
            "imputed_max" => Ok(LviSource::ImputedMax),
            "imputed_singleton" => Ok(LviSource::ImputedSingleton),
            other => Err(Error::SchemaViolation(format!("unknown lvi_source '{other}'"))),
        }
    }
}

/// Normalized columns: z-scored hpt and lvd, log10-seconds lve and lvi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub hpt_z: f64,
    pub lvd_z: f64,
    pub lve_log: f64,
    pub lvi_log: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VowelMeasures {
    pub sentence_id: String,
    pub cuer_id: String,
    pub hearing: Hearing,
    pub index: usize,
    pub label: String,
    /// Lip target instant, seconds.
    pub lip_mid: f64,
    /// Hand target instant, seconds.
    pub hand_mid: f64,
    pub hpt: f64,
    pub lve: f64,
    pub lvi: f64,
    pub lvd: f64,
    pub lvi_source: LviSource,
    pub norm: Option<Normalized>,
}

/// Computes the measures of every vowel in `timeline`.
pub fn compute_measures(
    timeline: &SentenceTimeline,
    convention: LviConvention,
) -> Result<Vec<VowelMeasures>> {
    timeline.validate()?;
    let lip_mids: Vec<f64> = timeline.lip_vowels.iter().map(midpoint).collect();
    for (i, w) in lip_mids.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NonmonotonicMidpoints {
                sentence: timeline.sentence_id.clone(),
                index: i + 1,
            });
        }
    }
    if let Some(i) = lip_mids.iter().position(|&t| !(t < timeline.sentence_end)) {
        return Err(Error::NonpositiveLve {
            sentence: timeline.sentence_id.clone(),
            index: i,
        });
    }

    let n = lip_mids.len();
    let gaps: Vec<f64> = lip_mids.windows(2).map(|w| w[1] - w[0]).collect();
    let max_gap = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lvi_of = |i: usize, lvd: f64| -> (f64, LviSource) {
        if n == 1 {
            return (lvd, LviSource::ImputedSingleton);
        }
        let measured = match convention {
            LviConvention::Backward => i.checked_sub(1).map(|k| gaps[k]),
            LviConvention::Forward => gaps.get(i).copied(),
        };
        match measured {
            Some(v) => (v, LviSource::Measured),
            None => (max_gap, LviSource::ImputedMax),
        }
    };

    Ok(timeline
        .lip_vowels
        .iter()
        .zip(&timeline.hand_vowels)
        .enumerate()
        .map(|(i, (lip, hand))| {
            let lip_mid = lip_mids[i];
            let hand_mid = midpoint(hand);
            let lvd = lip.end - lip.start;
            let (lvi, lvi_source) = lvi_of(i, lvd);
            VowelMeasures {
                sentence_id: timeline.sentence_id.clone(),
                cuer_id: timeline.cuer_id.clone(),
                hearing: timeline.hearing,
                index: i,
                label: lip.label.clone(),
                lip_mid,
                hand_mid,
                hpt: lip_mid - hand_mid,
                lve: timeline.sentence_end - lip_mid,
                lvi,
                lvd,
                lvi_source,
                norm: None,
            }
        })
        .collect())
}

/// Flat analysis table, ordered by `(cuer_id, sentence_id, index)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureTable {
    pub rows: Vec<VowelMeasures>,
    /// Normalization applied to `rows[..].norm`, when present.
    pub norm: Option<NormContext>,
}

pub type SentenceKey = (String, String);

impl MeasureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Syllable number per cuer.
    pub fn syllable_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.rows {
            *counts.entry(r.cuer_id.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Per-sentence means of raw lvi and lvd over all rows of the sentence.
    pub fn sentence_means(&self) -> HashMap<SentenceKey, (f64, f64)> {
        let mut acc: HashMap<SentenceKey, (f64, f64, usize)> = HashMap::new();
        for r in &self.rows {
            let e = acc
                .entry((r.cuer_id.clone(), r.sentence_id.clone()))
                .or_insert((0.0, 0.0, 0));
            e.0 += r.lvi;
            e.1 += r.lvd;
            e.2 += 1;
        }
        acc.into_iter()
            .map(|(k, (a, b, n))| (k, (a / n as f64, b / n as f64)))
            .collect()
    }

    /// Distinct sentences in table order.
    pub fn sentences(&self) -> Vec<(SentenceKey, Hearing)> {
        let mut out: Vec<(SentenceKey, Hearing)> = Vec::new();
        for r in &self.rows {
            let key = (r.cuer_id.clone(), r.sentence_id.clone());
            if out.last().map(|(k, _)| k != &key).unwrap_or(true) {
                out.push((key, r.hearing));
            }
        }
        out
    }

    pub fn filter(&self, mut keep: impl FnMut(&VowelMeasures) -> bool) -> MeasureTable {
        MeasureTable {
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
            norm: self.norm.clone(),
        }
    }

    /// CSV export; normalized columns are appended when every row has them.
    pub fn to_csv(&self) -> String {
        let with_norm = !self.rows.is_empty() && self.rows.iter().all(|r| r.norm.is_some());
        let mut out = String::from(
            "cuer_id,hearing,sentence_id,index,label,t_mid_s,T_mid_s,hpt_s,lve_s,lvi_s,lvd_s,lvi_source",
        );
        if with_norm {
            out.push_str(",hpt_z,lvd_z,lve_log,lvi_log");
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.cuer_id,
                r.hearing,
                r.sentence_id,
                r.index,
                r.label,
                r.lip_mid,
                r.hand_mid,
                r.hpt,
                r.lve,
                r.lvi,
                r.lvd,
                r.lvi_source
            ));
            if let (true, Some(n)) = (with_norm, r.norm) {
                out.push_str(&format!(",{},{},{},{}", n.hpt_z, n.lvd_z, n.lve_log, n.lvi_log));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the CSV export. Normalized columns, if present, are ignored:
    /// rows come back raw and `norm` is cleared.
    pub fn from_csv(text: &str) -> Result<MeasureTable> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::SchemaViolation(e.to_string()))?
            .clone();
        let names = [
            "cuer_id", "hearing", "sentence_id", "index", "label", "t_mid_s", "T_mid_s", "hpt_s",
            "lve_s", "lvi_s", "lvd_s", "lvi_source",
        ];
        let mut idx = [0usize; 12];
        for (slot, name) in idx.iter_mut().zip(names) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::SchemaViolation(format!("missing column '{name}'")))?;
        }
        let mut rows = Vec::new();
        for (n, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::SchemaViolation(e.to_string()))?;
            let field = |k: usize| rec.get(idx[k]).unwrap_or("");
            let num = |k: usize| -> Result<f64> {
                field(k).parse().map_err(|_| {
                    Error::SchemaViolation(format!("row {}: bad {} '{}'", n + 1, names[k], field(k)))
                })
            };
            rows.push(VowelMeasures {
                cuer_id: field(0).to_string(),
                hearing: field(1).parse()?,
                sentence_id: field(2).to_string(),
                index: field(3)
                    .parse()
                    .map_err(|_| Error::SchemaViolation(format!("row {}: bad index", n + 1)))?,
                label: field(4).to_string(),
                lip_mid: num(5)?,
                hand_mid: num(6)?,
                hpt: num(7)?,
                lve: num(8)?,
                lvi: num(9)?,
                lvd: num(10)?,
                lvi_source: field(11).parse()?,
                norm: None,
            });
        }
        Ok(MeasureTable { rows, norm: None })
    }
}

/// Concatenates the measures of all timelines into a stably ordered table.
pub fn assemble_table(
    timelines: &[SentenceTimeline],
    convention: LviConvention,
) -> Result<MeasureTable> {
    let mut seen = HashSet::new();
    for t in timelines {
        if !seen.insert((t.cuer_id.as_str(), t.sentence_id.as_str())) {
            return Err(Error::DuplicateSentence {
                cuer: t.cuer_id.clone(),
                sentence: t.sentence_id.clone(),
            });
        }
    }
    let mut order: Vec<&SentenceTimeline> = timelines.iter().collect();
    order.sort_by(|a, b| (&a.cuer_id, &a.sentence_id).cmp(&(&b.cuer_id, &b.sentence_id)));
    let mut rows = Vec::new();
    for t in order {
        rows.extend(compute_measures(t, convention)?);
    }
    Ok(MeasureTable { rows, norm: None })
}
