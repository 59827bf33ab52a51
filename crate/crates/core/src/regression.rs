//! Hand preceding time models.
//!
//! In normalized space (z-scored HPT `d`, log10 LVE `e`, log10 LVI `a`,
//! z-scored LVD `b`) the combined predictor is
//!
//! ```text
//! d = f0(e)                      if e <= gamma
//! d = l1 * f1(a) + l2 * f2(b)    otherwise
//! ```
//!
//! with `l1 = alpha / (alpha + C beta)`, `l2 = C beta / (alpha + C beta)`,
//! `C = mean(alpha) / mean(beta)` over the sentence, all on raw seconds.
//! `f0` is piecewise linear at `gamma`, pieces fit independently.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::annot_io::Hearing;
use crate::error::{Error, Result};
use crate::measures::{LviSource, MeasureTable, Normalized, SentenceKey, VowelMeasures};
use crate::normalize::{zscore, GroupStats, NormContext};

/// Breakpoint in log10-seconds LVE space.
pub const DEFAULT_GAMMA: f64 = -0.34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
    pub n: usize,
    pub residual_mse: f64,
    #[serde(default)]
    pub slope_se: f64,
    #[serde(default)]
    pub intercept_se: f64,
}

impl LinearModel {
    /// A model with known coefficients and no fit statistics.
    pub fn line(slope: f64, intercept: f64) -> Self {
        LinearModel {
            slope,
            intercept,
            n: 0,
            residual_mse: 0.0,
            slope_se: 0.0,
            intercept_se: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Closed-form least squares line through `points`.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<LinearModel> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let s2 = if n > 2 { ssr / (nf - 2.0) } else { 0.0 };
    Ok(LinearModel {
        slope,
        intercept,
        n,
        residual_mse: ssr / nf,
        slope_se: (s2 / sxx).sqrt(),
        intercept_se: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLveModel {
    pub gamma: f64,
    pub left: LinearModel,
    pub right: LinearModel,
}

impl PiecewiseLveModel {
    /// The boundary `lve_log == gamma` belongs to the left piece.
    pub fn eval(&self, lve_log: f64) -> f64 {
        if lve_log <= self.gamma {
            self.left.eval(lve_log)
        } else {
            self.right.eval(lve_log)
        }
    }

    /// Residual MSE over both pieces.
    pub fn residual_mse(&self) -> f64 {
        let n = (self.left.n + self.right.n) as f64;
        (self.left.residual_mse * self.left.n as f64 + self.right.residual_mse * self.right.n as f64) / n
    }
}

fn norm_of(row: &VowelMeasures) -> Result<Normalized> {
    row.norm.ok_or_else(|| {
        Error::UnfittedPredictor(format!(
            "row {}/{}#{} has no normalized columns",
            row.cuer_id, row.sentence_id, row.index
        ))
    })
}

/// Fits the two pieces of `f0` on `(lve_log, hpt_z)` split at `gamma`.
pub fn fit_f0(rows: &[VowelMeasures], gamma: f64) -> Result<PiecewiseLveModel> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for r in rows {
        let n = norm_of(r)?;
        if n.lve_log <= gamma {
            left.push((n.lve_log, n.hpt_z));
        } else {
            right.push((n.lve_log, n.hpt_z));
        }
    }
    for (side, pts) in [("left", &left), ("right", &right)] {
        if pts.len() < 2 {
            return Err(Error::EmptySide {
                gamma,
                side,
                count: pts.len(),
            });
        }
    }
    Ok(PiecewiseLveModel {
        gamma,
        left: ols_fit(&left)?,
        right: ols_fit(&right)?,
    })
}

/// Scans `gamma` over [-1.0, 0.2] in steps of 0.01 and returns the value
/// minimizing the total residual MSE of `f0`, with that MSE.
pub fn grid_search_gamma(rows: &[VowelMeasures]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for k in -100..=20 {
        let gamma = k as f64 / 100.0;
        match fit_f0(rows, gamma) {
            Ok(m) => {
                let mse = m.residual_mse();
                if best.map(|(_, b)| mse < b).unwrap_or(true) {
                    best = Some((gamma, mse));
                }
            }
            Err(Error::EmptySide { .. }) | Err(Error::DegenerateDesign) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::EmptySide {
        gamma: f64::NAN,
        side: "either",
        count: 0,
    })
}

/// Mixing weights of `f1` and `f2`; they sum to one and lie in (0, 1).
pub fn lambda_weights(alpha: f64, beta: f64, alpha_bar: f64, beta_bar: f64) -> Result<(f64, f64)> {
    for v in [alpha, beta, alpha_bar, beta_bar] {
        if !(v > 0.0) {
            return Err(Error::NonpositiveInput(v));
        }
    }
    let c = alpha_bar / beta_bar;
    let denom = alpha + c * beta;
    Ok((alpha / denom, c * beta / denom))
}

/// Inverse of the HPT z-score.
pub fn denormalize_hpt(delta_prime: f64, group: &GroupStats) -> Result<f64> {
    if !(group.sigma_hpt > 0.0) {
        return Err(Error::DegenerateGroup(format!(
            "group '{}' has sigma_hpt {}",
            group.group_key, group.sigma_hpt
        )));
    }
    Ok(delta_prime * group.sigma_hpt + group.mu_hpt)
}

pub fn predict_hand_instant(t_mid: f64, hpt: f64) -> f64 {
    t_mid - hpt
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subset {
    #[serde(rename = "ALL")]
    All,
    #[serde(rename = "NORMAL")]
    Normal,
    #[serde(rename = "DEAF")]
    Deaf,
}

impl Subset {
    pub fn contains(self, hearing: Hearing) -> bool {
        match self {
            Subset::All => true,
            Subset::Normal => hearing == Hearing::Normal,
            Subset::Deaf => hearing == Hearing::Deaf,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "ALL",
            Subset::Normal => "NORMAL",
            Subset::Deaf => "DEAF",
        }
    }

    /// A-LR, N-LR or D-LR.
    pub fn lr_name(self) -> &'static str {
        match self {
            Subset::All => "A-LR",
            Subset::Normal => "N-LR",
            Subset::Deaf => "D-LR",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ALL" => Ok(Subset::All),
            "NORMAL" => Ok(Subset::Normal),
            "DEAF" => Ok(Subset::Deaf),
            other => Err(Error::UsageError(format!("unknown subset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Hand segment taken at the lip instant (zero lead).
    AudioBased,
    /// Group mean HPT.
    MeanBased,
    /// Piecewise `f0` on both sides of `gamma`.
    LveOnly,
    /// `f0` below `gamma`, weighted `f1`/`f2` above.
    Combined,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AudioBased => "audio-based",
            Variant::MeanBased => "mean-based",
            Variant::LveOnly => "lve-only",
            Variant::Combined => "combined",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "audio" | "audio-based" => Ok(Variant::AudioBased),
            "mean" | "mean-based" => Ok(Variant::MeanBased),
            "lve" | "lve-only" => Ok(Variant::LveOnly),
            "combined" => Ok(Variant::Combined),
            other => Err(Error::UsageError(format!("unknown variant '{other}'"))),
        }
    }
}

/// Rows used to fit `f1` and `f2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitRegion {
    /// Only rows with `lve_log > gamma`.
    #[default]
    Right,
    All,
}

impl FromStr for FitRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "right" => Ok(FitRegion::Right),
            "all" => Ok(FitRegion::All),
            other => Err(Error::UsageError(format!("unknown fit region '{other}'"))),
        }
    }
}

/// How `f1` and `f2` are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1F2Estimator {
    /// Separate regressions of HPT on LVI and on LVD.
    #[default]
    Marginal,
    /// One least-squares fit of the weighted combination, four coefficients.
    Joint,
}

impl FromStr for F1F2Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "marginal" => Ok(F1F2Estimator::Marginal),
            "joint" => Ok(F1F2Estimator::Joint),
            other => Err(Error::UsageError(format!("unknown f1/f2 estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub gamma: f64,
    pub fit_f1f2_on: FitRegion,
    pub estimator: F1F2Estimator,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            gamma: DEFAULT_GAMMA,
            fit_f1f2_on: FitRegion::Right,
            estimator: F1F2Estimator::Marginal,
        }
    }
}

/// A fitted HPT predictor together with the normalization it was fit under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HptPredictor {
    pub variant: Variant,
    pub subset: Subset,
    pub gamma: f64,
    pub f0: Option<PiecewiseLveModel>,
    pub f1: Option<LinearModel>,
    pub f2: Option<LinearModel>,
    #[serde(rename = "norm_policy")]
    pub policy: crate::normalize::NormPolicy,
    pub groups: Vec<GroupStats>,
    #[serde(default)]
    pub fit_f1f2_on: FitRegion,
    #[serde(default)]
    pub estimator: F1F2Estimator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

/// Weights applied to `f1`/`f2` for one row.
fn row_lambdas(row: &VowelMeasures, means: (f64, f64)) -> Result<(f64, f64)> {
    if row.lvi_source == LviSource::ImputedSingleton {
        return Ok((0.0, 1.0));
    }
    lambda_weights(row.lvi, row.lvd, means.0, means.1)
}

fn means_for(
    means: &HashMap<SentenceKey, (f64, f64)>,
    row: &VowelMeasures,
) -> Result<(f64, f64)> {
    means
        .get(&(row.cuer_id.clone(), row.sentence_id.clone()))
        .copied()
        .ok_or_else(|| Error::UnfittedPredictor(format!("no sentence means for {}", row.sentence_id)))
}

fn fit_joint(
    rows: &[&VowelMeasures],
    means: &HashMap<SentenceKey, (f64, f64)>,
) -> Result<(LinearModel, LinearModel)> {
    let n = rows.len();
    if n < 5 {
        return Err(Error::TooFewPoints(n));
    }
    let mut xtx = Matrix4::<f64>::zeros();
    let mut xty = Vector4::<f64>::zeros();
    let mut design = Vec::with_capacity(n);
    for r in rows {
        let nm = norm_of(r)?;
        let (l1, l2) = row_lambdas(r, means_for(means, r)?)?;
        let x = Vector4::new(l1 * nm.lvi_log, l1, l2 * nm.lvd_z, l2);
        xtx += x * x.transpose();
        xty += x * nm.hpt_z;
        design.push((x, nm.hpt_z));
    }
    let inv = xtx.try_inverse().ok_or(Error::DegenerateDesign)?;
    let coef = inv * xty;
    let ssr: f64 = design
        .iter()
        .map(|(x, y)| {
            let r = y - x.dot(&coef);
            r * r
        })
        .sum();
    let s2 = ssr / (n as f64 - 4.0);
    let se = |k: usize| (s2 * inv[(k, k)]).max(0.0).sqrt();
    let mse = ssr / n as f64;
    let f1 = LinearModel {
        slope: coef[0],
        intercept: coef[1],
        n,
        residual_mse: mse,
        slope_se: se(0),
        intercept_se: se(1),
    };
    let f2 = LinearModel {
        slope: coef[2],
        intercept: coef[3],
        n,
        residual_mse: mse,
        slope_se: se(2),
        intercept_se: se(3),
    };
    Ok((f1, f2))
}

/// Fits `variant` on the rows of `subset`. The table must be normalized;
/// its normalization context is stored in the predictor.
pub fn fit_predictor(
    table: &MeasureTable,
    subset: Subset,
    variant: Variant,
    opts: &FitOptions,
) -> Result<HptPredictor> {
    let ctx = table
        .norm
        .clone()
        .ok_or_else(|| Error::UnfittedPredictor("table has not been normalized".into()))?;
    let rows: Vec<VowelMeasures> = table
        .rows
        .iter()
        .filter(|r| subset.contains(r.hearing))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyGroup(format!("no {} rows to fit", subset)));
    }
    let mut predictor = HptPredictor {
        variant,
        subset,
        gamma: opts.gamma,
        f0: None,
        f1: None,
        f2: None,
        policy: ctx.policy,
        groups: ctx.groups,
        fit_f1f2_on: opts.fit_f1f2_on,
        estimator: opts.estimator,
        config_hash: None,
    };
    if matches!(variant, Variant::LveOnly | Variant::Combined) {
        predictor.f0 = Some(fit_f0(&rows, opts.gamma)?);
    }
    if variant == Variant::Combined {
        let mut region = Vec::new();
        for r in &rows {
            if opts.fit_f1f2_on == FitRegion::All || norm_of(r)?.lve_log > opts.gamma {
                region.push(r);
            }
        }
        match opts.estimator {
            F1F2Estimator::Marginal => {
                let alpha: Vec<(f64, f64)> = region
                    .iter()
                    .map(|r| norm_of(r).map(|n| (n.lvi_log, n.hpt_z)))
                    .collect::<Result<_>>()?;
                let beta: Vec<(f64, f64)> = region
                    .iter()
                    .map(|r| norm_of(r).map(|n| (n.lvd_z, n.hpt_z)))
                    .collect::<Result<_>>()?;
                predictor.f1 = Some(ols_fit(&alpha)?);
                predictor.f2 = Some(ols_fit(&beta)?);
            }
            F1F2Estimator::Joint => {
                let means = MeasureTable {
                    rows: rows.clone(),
                    norm: None,
                }
                .sentence_means();
                let (f1, f2) = fit_joint(&region, &means)?;
                predictor.f1 = Some(f1);
                predictor.f2 = Some(f2);
            }
        }
    }
    Ok(predictor)
}

impl HptPredictor {
    pub fn norm_context(&self) -> NormContext {
        NormContext {
            policy: self.policy,
            groups: self.groups.clone(),
        }
    }

    /// `A-LR/combined` style identifier.
    pub fn id(&self) -> String {
        format!("{}/{}", self.subset.lr_name(), self.variant)
    }

    pub fn group_for(&self, row: &VowelMeasures) -> Result<&GroupStats> {
        let key = self.policy.key_for(row);
        self.groups
            .iter()
            .find(|g| g.group_key == key)
            .ok_or_else(|| Error::MissingStats(key.to_string()))
    }

    /// Normalized features of `row` under this predictor's statistics.
    pub fn features(&self, row: &VowelMeasures) -> Result<Normalized> {
        let g = self.group_for(row)?;
        Ok(Normalized {
            hpt_z: zscore(row.hpt, g.mu_hpt, g.sigma_hpt)?,
            lvd_z: zscore(row.lvd, g.mu_lvd, g.sigma_lvd)?,
            lve_log: crate::normalize::log_scale(row.lve)?,
            lvi_log: crate::normalize::log_scale(row.lvi)?,
        })
    }

    /// Ground-truth HPT of `row` in this predictor's z-space.
    pub fn truth_norm(&self, row: &VowelMeasures) -> Result<f64> {
        Ok(self.features(row)?.hpt_z)
    }

    /// Predicted HPT in z-space. `means` are the sentence's raw
    /// `(mean lvi, mean lvd)` in seconds.
    pub fn predict_norm(&self, row: &VowelMeasures, means: (f64, f64)) -> Result<f64> {
        let unfitted = |what: &str| Error::UnfittedPredictor(format!("{} predictor lacks {what}", self.variant));
        match self.variant {
            Variant::AudioBased => {
                let g = self.group_for(row)?;
                zscore(0.0, g.mu_hpt, g.sigma_hpt)
            }
            Variant::MeanBased => {
                self.group_for(row)?;
                Ok(0.0)
            }
            Variant::LveOnly => {
                let f0 = self.f0.as_ref().ok_or_else(|| unfitted("f0"))?;
                Ok(f0.eval(self.features(row)?.lve_log))
            }
            Variant::Combined => {
                let f0 = self.f0.as_ref().ok_or_else(|| unfitted("f0"))?;
                let f1 = self.f1.as_ref().ok_or_else(|| unfitted("f1"))?;
                let f2 = self.f2.as_ref().ok_or_else(|| unfitted("f2"))?;
                let x = self.features(row)?;
                if x.lve_log <= self.gamma {
                    Ok(f0.left.eval(x.lve_log))
                } else {
                    let (l1, l2) = row_lambdas(row, means)?;
                    Ok(l1 * f1.eval(x.lvi_log) + l2 * f2.eval(x.lvd_z))
                }
            }
        }
    }

    /// Predicted HPT in seconds.
    pub fn predict_seconds(&self, row: &VowelMeasures, means: (f64, f64)) -> Result<f64> {
        if self.variant == Variant::AudioBased {
            self.group_for(row)?;
            return Ok(0.0);
        }
        let z = self.predict_norm(row, means)?;
        denormalize_hpt(z, self.group_for(row)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("predictor serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<HptPredictor> {
        let p: HptPredictor =
            serde_json::from_str(text).map_err(|e| Error::SchemaViolation(e.to_string()))?;
        let ok = match p.variant {
            Variant::Combined => p.f0.is_some() && p.f1.is_some() && p.f2.is_some(),
            Variant::LveOnly => p.f0.is_some(),
            Variant::MeanBased | Variant::AudioBased => true,
        };
        if !ok {
            return Err(Error::UnfittedPredictor(format!(
                "{} predictor file is missing models",
                p.variant
            )));
        }
        Ok(p)
    }
}
