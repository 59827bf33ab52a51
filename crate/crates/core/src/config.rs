//! Flat `key = value` configuration: run defaults and synthesis profiles.
//!
//! Blank lines and lines starting with `#` are ignored. Later keys win.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::annot_io::{Hearing, Sampling, VowelSet, DEFAULT_VOWELS};
use crate::error::{Error, Result};
use crate::evaluate::PositionMap;
use crate::measures::LviConvention;
use crate::normalize::NormPolicy;
use crate::regression::{F1F2Estimator, FitOptions, FitRegion, LinearModel, DEFAULT_GAMMA};
use crate::synth::{CuerProfile, GenerativeForm, GroundTruthModel};

/// Parses `key = value` lines, keeping their order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::UsageError(format!("config line {}: expected key = value", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::UsageError(format!("config line {}: empty key", n + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::UsageError(format!("{key}: cannot parse '{value}'")))
}

/// Parses `train:test`, both positive integers.
pub fn parse_split(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::UsageError(format!("split ratio '{text}' must look like 4:1"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_sampling(text: &str) -> Result<Sampling> {
    match text {
        "nearest" => Ok(Sampling::Nearest),
        "linear" => Ok(Sampling::Linear),
        other => Err(Error::UsageError(format!("unknown sampling '{other}'"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub norm_policy: NormPolicy,
    pub lvi_convention: LviConvention,
    pub fit_f1f2_on: FitRegion,
    pub f1f2_estimator: F1F2Estimator,
    pub split_ratio: (u32, u32),
    pub seed: u64,
    pub vowel_labels: VowelSet,
    pub position_map: PositionMap,
    pub sampling: Sampling,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gamma: DEFAULT_GAMMA,
            norm_policy: NormPolicy::PerCuer,
            lvi_convention: LviConvention::Backward,
            fit_f1f2_on: FitRegion::Right,
            f1f2_estimator: F1F2Estimator::Marginal,
            split_ratio: (4, 1),
            seed: 0,
            vowel_labels: VowelSet::new(DEFAULT_VOWELS),
            position_map: PositionMap::default(),
            sampling: Sampling::Nearest,
        }
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 10] = [
        "f1f2_estimator",
        "fit_f1f2_on",
        "gamma",
        "lvi_convention",
        "norm_policy",
        "position_map",
        "sampling",
        "seed",
        "split_ratio",
        "vowel_labels",
    ];

    /// Defaults overridden by the entries of a config document.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (k, v) in parse_kv(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "gamma" => {
                let g: f64 = parse_num(key, value)?;
                if !g.is_finite() {
                    return Err(Error::UsageError(format!("gamma must be finite, got {value}")));
                }
                self.gamma = g;
            }
            "norm_policy" => self.norm_policy = value.parse()?,
            "lvi_convention" => self.lvi_convention = value.parse()?,
            "fit_f1f2_on" => self.fit_f1f2_on = value.parse()?,
            "f1f2_estimator" => self.f1f2_estimator = value.parse()?,
            "split_ratio" => self.split_ratio = parse_split(value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "vowel_labels" => {
                let labels: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                if labels.is_empty() {
                    return Err(Error::UsageError("vowel_labels is empty".into()));
                }
                self.vowel_labels = VowelSet::new(labels);
            }
            "position_map" => self.position_map = PositionMap::parse(value)?,
            "sampling" => self.sampling = parse_sampling(value)?,
            other => return Err(Error::UsageError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// One `key = value` line per key, sorted by key.
    pub fn to_canonical_string(&self) -> String {
        let vowels: Vec<&str> = self.vowel_labels.labels().collect();
        let values: BTreeMap<&str, String> = [
            ("f1f2_estimator", format!("{:?}", self.f1f2_estimator).to_lowercase()),
            ("fit_f1f2_on", format!("{:?}", self.fit_f1f2_on).to_lowercase()),
            ("gamma", format!("{:?}", self.gamma)),
            ("lvi_convention", format!("{:?}", self.lvi_convention).to_lowercase()),
            ("norm_policy", self.norm_policy.to_string()),
            ("position_map", self.position_map.to_config_string()),
            ("sampling", format!("{:?}", self.sampling).to_lowercase()),
            ("seed", self.seed.to_string()),
            ("split_ratio", format!("{}:{}", self.split_ratio.0, self.split_ratio.1)),
            ("vowel_labels", vowels.join(",")),
        ]
        .into_iter()
        .collect();
        values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of the canonical form, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            gamma: self.gamma,
            fit_f1f2_on: self.fit_f1f2_on,
            estimator: self.f1f2_estimator,
        }
    }
}

/// Profiles and the corpus model read from a synthesis config.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub profiles: Vec<CuerProfile>,
    pub model: GroundTruthModel,
}

fn model_key(model: &mut GroundTruthModel, field: &str, value: &str, key: &str) -> Result<()> {
    if field == "gamma" {
        model.gamma = parse_num(key, value)?;
        return Ok(());
    }
    if field == "form" {
        model.form = match value {
            "combined" => GenerativeForm::Combined,
            "lve" | "lve-only" => GenerativeForm::LveOnly,
            other => return Err(Error::UsageError(format!("{key}: unknown form '{other}'"))),
        };
        return Ok(());
    }
    let (piece, coef) = field
        .rsplit_once('.')
        .ok_or_else(|| Error::UsageError(format!("unknown model key '{key}'")))?;
    let line: &mut LinearModel = match piece {
        "f0_left" => &mut model.f0_left,
        "f0_right" => &mut model.f0_right,
        "f1" => &mut model.f1,
        "f2" => &mut model.f2,
        _ => return Err(Error::UsageError(format!("unknown model key '{key}'"))),
    };
    let v: f64 = parse_num(key, value)?;
    match coef {
        "slope" => *line = LinearModel::line(v, line.intercept),
        "intercept" => *line = LinearModel::line(line.slope, v),
        _ => return Err(Error::UsageError(format!("unknown model key '{key}'"))),
    }
    Ok(())
}

/// Pooled descriptive statistics (ms) used when a profile id is not one of the five known cuers.
fn pooled_default(id: &str, hearing: Hearing) -> CuerProfile {
    match hearing {
        Hearing::Normal => CuerProfile::with_stats_ms(id, hearing, 280.0, 164.0, 397.0, 121.0),
        Hearing::Deaf => CuerProfile::with_stats_ms(id, hearing, 159.0, 108.0, 369.0, 99.0),
    }
}

/// Reads a synthesis config.
///
/// ```text
/// profiles = NF1,DF1
/// NF1.residual_sigma = 0.3
/// DF1.model = deaf
/// model.f1.slope = 1.2
/// model.deaf.f2.intercept = -0.3
/// ```
///
/// Profiles named like the five known cuers start from their statistics;
/// others need `<id>.hearing` and start from the pooled row of that group.
/// `<id>.model = deaf|normal|null|corpus` picks a per-profile model.
pub fn parse_profiles(text: &str) -> Result<SynthConfig> {
    let entries = parse_kv(text)?;
    let ids: Vec<String> = match entries.iter().rev().find(|(k, _)| k == "profiles") {
        Some((_, v)) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => CuerProfile::table1().into_iter().map(|p| p.cuer_id).collect(),
    };
    if ids.is_empty() {
        return Err(Error::InvalidProfile("no profiles listed".into()));
    }
    let mut model = GroundTruthModel::default_normal();
    let mut normal_model = GroundTruthModel::default_normal();
    let mut deaf_model = GroundTruthModel::default_deaf();
    let mut profiles = Vec::new();
    let mut choice: BTreeMap<String, String> = BTreeMap::new();
    for id in &ids {
        let explicit = entries
            .iter()
            .rev()
            .find(|(k, _)| *k == format!("{id}.hearing"))
            .map(|(_, v)| v.parse::<Hearing>())
            .transpose()?;
        let p = match (CuerProfile::table1_by_id(id), explicit) {
            (Some(mut p), h) => {
                if let Some(h) = h {
                    p.hearing = h;
                }
                p
            }
            (None, Some(h)) => pooled_default(id, h),
            (None, None) => {
                return Err(Error::InvalidProfile(format!("{id}: unknown profile needs {id}.hearing")));
            }
        };
        profiles.push(p);
    }
    for (key, value) in &entries {
        if key == "profiles" {
            continue;
        }
        if let Some(rest) = key.strip_prefix("model.") {
            if let Some(f) = rest.strip_prefix("normal.") {
                model_key(&mut normal_model, f, value, key)?;
            } else if let Some(f) = rest.strip_prefix("deaf.") {
                model_key(&mut deaf_model, f, value, key)?;
            } else {
                model_key(&mut model, rest, value, key)?;
            }
            continue;
        }
        let (id, field) = key
            .split_once('.')
            .ok_or_else(|| Error::UsageError(format!("unknown synth key '{key}'")))?;
        let Some(p) = profiles.iter_mut().find(|p| p.cuer_id == id) else {
            return Err(Error::InvalidProfile(format!("'{key}' refers to an unlisted profile")));
        };
        let ms = |v: &str| -> Result<f64> { Ok(parse_num::<f64>(key, v)? / 1000.0) };
        match field {
            "hearing" => {}
            "mu_hpt_ms" => p.mu_hpt = ms(value)?,
            "sigma_hpt_ms" => p.sigma_hpt = ms(value)?,
            "mu_lvd_ms" => p.mu_lvd = ms(value)?,
            "sigma_lvd_ms" => p.sigma_lvd = ms(value)?,
            "pause_prob" => p.pause_prob = parse_num(key, value)?,
            "pause_min_ms" => p.pause_range.0 = ms(value)?,
            "pause_max_ms" => p.pause_range.1 = ms(value)?,
            "syllables_mean" => p.syllables.mean = parse_num(key, value)?,
            "syllables_min" => p.syllables.min = parse_num(key, value)?,
            "syllables_max" => p.syllables.max = parse_num(key, value)?,
            "residual_sigma" => p.residual_sigma = parse_num(key, value)?,
            "residual_ar" => p.residual_ar = parse_num(key, value)?,
            "sentences" => p.sentences = Some(parse_num(key, value)?),
            "model" => {
                choice.insert(id.to_string(), value.clone());
            }
            _ => return Err(Error::UsageError(format!("unknown synth key '{key}'"))),
        }
    }
    for p in &mut profiles {
        p.model = match choice.get(&p.cuer_id).map(String::as_str) {
            None | Some("corpus") => None,
            Some("normal") => Some(normal_model),
            Some("deaf") => Some(deaf_model),
            Some("null") => Some(GroundTruthModel::null()),
            Some(other) => {
                return Err(Error::UsageError(format!("{}.model: unknown model '{other}'", p.cuer_id)));
            }
        };
        p.validate()?;
    }
    Ok(SynthConfig { profiles, model })
}
