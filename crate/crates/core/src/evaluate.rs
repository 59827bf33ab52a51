//! Scoring of HPT predictors: normalized MSE, mean hand coordinate distance
//! (MHCD), polar hand positions and a nearest-centroid position classifier.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annot_io::{HandTrack, Point, Sampling, DEFAULT_VOWELS};
use crate::error::{Error, Result};
use crate::measures::{MeasureTable, SentenceKey, VowelMeasures};
use crate::regression::{predict_hand_instant, HptPredictor, Subset};

pub type TrackSet = HashMap<SentenceKey, HandTrack>;

/// Sentence-level train/test partition.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: BTreeSet<SentenceKey>,
    pub test: BTreeSet<SentenceKey>,
}

fn key_of(row: &VowelMeasures) -> SentenceKey {
    (row.cuer_id.clone(), row.sentence_id.clone())
}

impl Split {
    pub fn is_train(&self, row: &VowelMeasures) -> bool {
        self.train.contains(&key_of(row))
    }

    pub fn is_test(&self, row: &VowelMeasures) -> bool {
        self.test.contains(&key_of(row))
    }

    pub fn train_table(&self, table: &MeasureTable) -> MeasureTable {
        table.filter(|r| self.is_train(r))
    }

    pub fn test_table(&self, table: &MeasureTable) -> MeasureTable {
        table.filter(|r| self.is_test(r))
    }
}

/// Splits each cuer's sentences `train:test`, deterministically under `seed`.
pub fn split_sentences(table: &MeasureTable, ratio: (u32, u32), seed: u64) -> Result<Split> {
    if ratio.0 == 0 || ratio.1 == 0 {
        return Err(Error::UsageError(format!("split ratio {}:{} must be positive", ratio.0, ratio.1)));
    }
    let mut by_cuer: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in &table.rows {
        by_cuer
            .entry(r.cuer_id.clone())
            .or_default()
            .insert(r.sentence_id.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split::default();
    for (cuer, sentences) in by_cuer {
        if sentences.len() < 5 {
            return Err(Error::TooFewSentences {
                cuer,
                count: sentences.len(),
            });
        }
        let mut ids: Vec<String> = sentences.into_iter().collect();
        ids.shuffle(&mut rng);
        let n = ids.len();
        let n_test = ((n as f64 * ratio.1 as f64) / (ratio.0 + ratio.1) as f64).round() as usize;
        let n_test = n_test.clamp(1, n - 1);
        for (k, id) in ids.into_iter().enumerate() {
            let key = (cuer.clone(), id);
            if k < n_test {
                split.test.insert(key);
            } else {
                split.train.insert(key);
            }
        }
    }
    Ok(split)
}

/// Mean squared error in the normalized scale.
pub fn mse_norm(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyGroup("no predictions to score".into()));
    }
    let sum: f64 = predictions
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Mean Euclidean distance between hand points sampled at paired instants.
pub fn mhcd(track: &HandTrack, gt_instants: &[f64], pred_instants: &[f64], sampling: Sampling) -> Result<f64> {
    if gt_instants.len() != pred_instants.len() {
        return Err(Error::LengthMismatch {
            left: gt_instants.len(),
            right: pred_instants.len(),
        });
    }
    if gt_instants.is_empty() {
        return Err(Error::EmptyGroup("no instants to compare".into()));
    }
    let mut total = 0.0;
    for (&g, &p) in gt_instants.iter().zip(pred_instants) {
        let (_, a) = track.sample(g, sampling)?;
        let (_, b) = track.sample(p, sampling)?;
        total += a.distance(b);
    }
    Ok(total / gt_instants.len() as f64)
}

/// Hand position relative to the lip center, image y-axis flipped so that
/// "up" is a positive angle. `r = 0` gives `theta = 0`.
pub fn to_polar(hand_point: Point, lip_center: Point) -> (f64, f64) {
    let dx = hand_point.x - lip_center.x;
    let dy = -(hand_point.y - lip_center.y);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let mut theta = dy.atan2(dx);
    if theta <= -PI {
        theta += 2.0 * PI;
    }
    (r, theta)
}

/// Inverse of [`to_polar`] about the same origin.
pub fn from_polar(r: f64, theta: f64, lip_center: Point) -> Point {
    Point::new(lip_center.x + r * theta.cos(), lip_center.y - r * theta.sin())
}

/// Vowel label to hand position class (1..=5).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionMap {
    map: BTreeMap<String, u8>,
}

impl Default for PositionMap {
    fn default() -> Self {
        // Five positions, grouping the finals of DEFAULT_VOWELS.
        let classes = [1u8, 1, 1, 2, 3, 4, 2, 3, 2, 3, 4, 4, 5, 5, 5, 4];
        PositionMap {
            map: DEFAULT_VOWELS
                .iter()
                .zip(classes)
                .map(|(v, c)| (v.to_string(), c))
                .collect(),
        }
    }
}

impl PositionMap {
    pub fn new(pairs: impl IntoIterator<Item = (String, u8)>) -> Result<Self> {
        let map: BTreeMap<String, u8> = pairs.into_iter().collect();
        if let Some((v, c)) = map.iter().find(|(_, &c)| !(1..=5).contains(&c)) {
            return Err(Error::UsageError(format!("vowel '{v}' mapped to position {c}, expected 1..5")));
        }
        Ok(PositionMap { map })
    }

    /// Parses `a:1,o:1,i:2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|item| {
                let (v, c) = item
                    .split_once(':')
                    .ok_or_else(|| Error::UsageError(format!("bad position map entry '{item}'")))?;
                let c: u8 = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::UsageError(format!("bad position class in '{item}'")))?;
                Ok((v.trim().to_string(), c))
            })
            .collect::<Result<Vec<_>>>()?;
        PositionMap::new(pairs)
    }

    pub fn class_of(&self, label: &str) -> Option<u8> {
        self.map.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u8)> {
        self.map.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn to_config_string(&self) -> String {
        self.map
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarSample {
    pub vowel_label: String,
    pub position_class: u8,
    pub r: f64,
    pub theta: f64,
}

impl PolarSample {
    fn cartesian(&self) -> (f64, f64) {
        (self.r * self.theta.cos(), self.r * self.theta.sin())
    }
}

/// Nearest-centroid accuracy of `test` against per-class centroids of
/// `train`; ties go to the lowest class id.
pub fn centroid_position_classifier(train: &[PolarSample], test: &[PolarSample]) -> Result<f64> {
    let mut sums = [(0.0f64, 0.0f64, 0usize); 5];
    for s in train {
        let k = (s.position_class as usize)
            .checked_sub(1)
            .filter(|&k| k < 5)
            .ok_or(Error::MissingClass(s.position_class))?;
        let (x, y) = s.cartesian();
        sums[k].0 += x;
        sums[k].1 += y;
        sums[k].2 += 1;
    }
    let mut centroids = [(0.0, 0.0); 5];
    for (k, &(x, y, n)) in sums.iter().enumerate() {
        if n == 0 {
            return Err(Error::MissingClass(k as u8 + 1));
        }
        centroids[k] = (x / n as f64, y / n as f64);
    }
    if test.is_empty() {
        return Err(Error::EmptyGroup("no test samples".into()));
    }
    let correct = test
        .iter()
        .filter(|s| {
            let (x, y) = s.cartesian();
            let mut best = (f64::INFINITY, 0u8);
            for (k, &(cx, cy)) in centroids.iter().enumerate() {
                let d = (x - cx).powi(2) + (y - cy).powi(2);
                if d < best.0 {
                    best = (d, k as u8 + 1);
                }
            }
            best.1 == s.position_class
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// Where a predicted hand target instant comes from.
#[derive(Debug, Clone, Copy)]
pub enum PredictionSource<'a> {
    /// The annotated hand target instant itself.
    GroundTruth,
    Fitted(&'a HptPredictor),
}

#[derive(Debug, Clone, Copy)]
pub struct NamedPredictor<'a> {
    pub id: &'a str,
    pub source: PredictionSource<'a>,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions<'a> {
    pub sampling: Sampling,
    pub positions: &'a PositionMap,
    /// Only test rows in this subset are scored.
    pub eval_subset: Subset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuerScores {
    pub e_hpt: f64,
    pub d_hpt_px: f64,
    pub position_accuracy: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub predictor_id: String,
    pub subset: String,
    pub e_hpt: f64,
    pub d_hpt_px: f64,
    pub position_accuracy: f64,
    pub count: usize,
    pub per_cuer: BTreeMap<String, CuerScores>,
}

/// One scored test row.
struct Scored {
    cuer: String,
    sq_err: f64,
    dist: f64,
    sample: Option<PolarSample>,
}

fn track_for<'t>(tracks: &'t TrackSet, row: &VowelMeasures) -> Result<&'t HandTrack> {
    tracks.get(&key_of(row)).ok_or_else(|| Error::MissingTrack {
        cuer: row.cuer_id.clone(),
        sentence: row.sentence_id.clone(),
    })
}

fn polar_at(
    track: &HandTrack,
    t: f64,
    row: &VowelMeasures,
    positions: &PositionMap,
    sampling: Sampling,
) -> Result<Option<PolarSample>> {
    let Some(position_class) = positions.class_of(&row.label) else {
        return Ok(None);
    };
    let (lip, hand) = track.sample(t, sampling)?;
    let (r, theta) = to_polar(hand, lip);
    Ok(Some(PolarSample {
        vowel_label: row.label.clone(),
        position_class,
        r,
        theta,
    }))
}

/// Predicted hand target instant and z-space `(prediction, truth)` for one row.
fn predict_row(
    source: PredictionSource<'_>,
    row: &VowelMeasures,
    means: &HashMap<SentenceKey, (f64, f64)>,
) -> Result<(f64, f64, f64)> {
    match source {
        PredictionSource::GroundTruth => Ok((row.hand_mid, 0.0, 0.0)),
        PredictionSource::Fitted(p) => {
            let m = means
                .get(&key_of(row))
                .copied()
                .ok_or_else(|| Error::UnfittedPredictor(format!("no sentence means for {}", row.sentence_id)))?;
            let hpt = p.predict_seconds(row, m)?;
            let z = p.predict_norm(row, m)?;
            let truth = p.truth_norm(row)?;
            Ok((predict_hand_instant(row.lip_mid, hpt), z, truth))
        }
    }
}

/// Polar hand positions at the instants `source` predicts for `rows`.
pub fn polar_samples(
    table: &MeasureTable,
    source: PredictionSource<'_>,
    tracks: &TrackSet,
    keep: impl Fn(&VowelMeasures) -> bool,
    positions: &PositionMap,
    sampling: Sampling,
) -> Result<Vec<(String, PolarSample)>> {
    let means = table.sentence_means();
    let mut out = Vec::new();
    for row in table.rows.iter().filter(|r| keep(r)) {
        let (instant, _, _) = predict_row(source, row, &means)?;
        if let Some(s) = polar_at(track_for(tracks, row)?, instant, row, positions, sampling)? {
            out.push((row.cuer_id.clone(), s));
        }
    }
    Ok(out)
}

/// Scores every predictor on the test sentences of `split`. The position
/// classifier is trained on ground-truth instants of the training sentences.
pub fn compare_predictors(
    table: &MeasureTable,
    predictors: &[NamedPredictor<'_>],
    tracks: &TrackSet,
    split: &Split,
    opts: &EvalOptions<'_>,
) -> Result<Vec<EvalReport>> {
    let in_subset = |r: &VowelMeasures| opts.eval_subset.contains(r.hearing);
    let train: Vec<PolarSample> = polar_samples(
        table,
        PredictionSource::GroundTruth,
        tracks,
        |r| split.is_train(r) && in_subset(r),
        opts.positions,
        opts.sampling,
    )?
    .into_iter()
    .map(|(_, s)| s)
    .collect();
    let means = table.sentence_means();
    let test_rows: Vec<&VowelMeasures> = table
        .rows
        .iter()
        .filter(|r| split.is_test(r) && in_subset(r))
        .collect();
    if test_rows.is_empty() {
        return Err(Error::EmptyGroup(format!("no {} test rows", opts.eval_subset)));
    }

    predictors
        .iter()
        .map(|np| {
            let mut scored = Vec::with_capacity(test_rows.len());
            for row in &test_rows {
                let (instant, z, truth) = predict_row(np.source, row, &means)?;
                let track = track_for(tracks, row)?;
                let (_, at_gt) = track.sample(row.hand_mid, opts.sampling)?;
                let (_, at_pred) = track.sample(instant, opts.sampling)?;
                scored.push(Scored {
                    cuer: row.cuer_id.clone(),
                    sq_err: (z - truth) * (z - truth),
                    dist: at_gt.distance(at_pred),
                    sample: polar_at(track, instant, row, opts.positions, opts.sampling)?,
                });
            }
            let summarize = |rows: &[&Scored]| -> Result<CuerScores> {
                let n = rows.len() as f64;
                let samples: Vec<PolarSample> = rows.iter().filter_map(|s| s.sample.clone()).collect();
                Ok(CuerScores {
                    e_hpt: rows.iter().map(|s| s.sq_err).sum::<f64>() / n,
                    d_hpt_px: rows.iter().map(|s| s.dist).sum::<f64>() / n,
                    position_accuracy: centroid_position_classifier(&train, &samples)?,
                    count: rows.len(),
                })
            };
            let all: Vec<&Scored> = scored.iter().collect();
            let overall = summarize(&all)?;
            let mut per_cuer = BTreeMap::new();
            let cuers: BTreeSet<&str> = scored.iter().map(|s| s.cuer.as_str()).collect();
            for cuer in cuers {
                let rows: Vec<&Scored> = scored.iter().filter(|s| s.cuer == cuer).collect();
                per_cuer.insert(cuer.to_string(), summarize(&rows)?);
            }
            Ok(EvalReport {
                predictor_id: np.id.to_string(),
                subset: opts.eval_subset.to_string(),
                e_hpt: overall.e_hpt,
                d_hpt_px: overall.d_hpt_px,
                position_accuracy: overall.position_accuracy,
                count: overall.count,
                per_cuer,
            })
        })
        .collect()
}

/// `predictor,subset,cuer,e_hpt,d_hpt_px,position_accuracy`; the aggregate
/// row of each report uses cuer `all`.
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("predictor,subset,cuer,e_hpt,d_hpt_px,position_accuracy\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},all,{},{},{}\n",
            r.predictor_id, r.subset, r.e_hpt, r.d_hpt_px, r.position_accuracy
        ));
        for (cuer, s) in &r.per_cuer {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.predictor_id, r.subset, cuer, s.e_hpt, s.d_hpt_px, s.position_accuracy
            ));
        }
    }
    out
}

/// `predictor,cuer,vowel,position_class,r_px,theta_rad`.
pub fn polar_to_csv(rows: &[(String, String, PolarSample)]) -> String {
    let mut out = String::from("predictor,cuer,vowel,position_class,r_px,theta_rad\n");
    for (pred, cuer, s) in rows {
        out.push_str(&format!(
            "{pred},{cuer},{},{},{},{}\n",
            s.vowel_label, s.position_class, s.r, s.theta
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseCell {
    pub eval_subset: Subset,
    pub lr_source: Subset,
    pub variant: String,
    pub e_hpt: f64,
}

/// Test-set e_HPT for every (evaluated subset, fitted predictor) pair;
/// subsets without test rows are skipped.
pub fn mse_matrix(table: &MeasureTable, predictors: &[HptPredictor], split: &Split) -> Result<Vec<MseCell>> {
    let means = table.sentence_means();
    let mut cells = Vec::new();
    for eval_subset in [Subset::All, Subset::Normal, Subset::Deaf] {
        let rows: Vec<&VowelMeasures> = table
            .rows
            .iter()
            .filter(|r| split.is_test(r) && eval_subset.contains(r.hearing))
            .collect();
        if rows.is_empty() {
            continue;
        }
        for p in predictors {
            let mut pred = Vec::with_capacity(rows.len());
            let mut truth = Vec::with_capacity(rows.len());
            for r in &rows {
                let (_, z, t) = predict_row(PredictionSource::Fitted(p), r, &means)?;
                pred.push(z);
                truth.push(t);
            }
            cells.push(MseCell {
                eval_subset,
                lr_source: p.subset,
                variant: p.variant.to_string(),
                e_hpt: mse_norm(&pred, &truth)?,
            });
        }
    }
    Ok(cells)
}

pub fn mse_matrix_to_csv(cells: &[MseCell]) -> String {
    let mut out = String::from("eval_subset,lr_source,variant,e_hpt\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{}\n",
            c.eval_subset,
            c.lr_source.lr_name(),
            c.variant,
            c.e_hpt
        ));
    }
    out
}
