//! Descriptive statistics and cuer normalization.
//!
//! HPT and LVD are z-scored against the statistics of the row's group;
//! LVE and LVI are mapped to log10 of seconds. Standard deviations use the
//! population (divisor `n`) form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annot_io::Hearing;
use crate::error::{Error, Result};
use crate::measures::{MeasureTable, Normalized, VowelMeasures};

pub const NORMAL_KEY: &str = "NORMAL";
pub const DEAF_KEY: &str = "DEAF";
pub const ALL_KEY: &str = "ALL";

/// Mean and variance accumulator that merges partial reductions exactly
/// (count-weighted), independent of how rows were partitioned.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: (na * self.mean + nb * other.mean) / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    pub fn population_variance(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn population_std(&self) -> f64 {
        self.population_variance().sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// One row of the descriptive statistics table, stored in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group_key: String,
    pub mu_hpt: f64,
    pub sigma_hpt: f64,
    pub mu_lvd: f64,
    pub sigma_lvd: f64,
    pub count: usize,
}

impl GroupStats {
    fn from_moments(key: &str, hpt: &Moments, lvd: &Moments) -> Result<GroupStats> {
        if hpt.n == 0 {
            return Err(Error::EmptyGroup(key.to_string()));
        }
        let stats = GroupStats {
            group_key: key.to_string(),
            mu_hpt: hpt.mean,
            sigma_hpt: hpt.population_std(),
            mu_lvd: lvd.mean,
            sigma_lvd: lvd.population_std(),
            count: hpt.n,
        };
        if stats.count < 2 || !(stats.sigma_hpt > 0.0) || !(stats.sigma_lvd > 0.0) {
            return Err(Error::DegenerateGroup(format!(
                "group '{key}' has {} rows, sigma_hpt {}, sigma_lvd {}",
                stats.count, stats.sigma_hpt, stats.sigma_lvd
            )));
        }
        Ok(stats)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    PerCuer,
    NormalVsDeaf,
    All,
}

impl FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-cuer" => Ok(Grouping::PerCuer),
            "normal-deaf" => Ok(Grouping::NormalVsDeaf),
            "all" => Ok(Grouping::All),
            other => Err(Error::UsageError(format!("unknown grouping '{other}'"))),
        }
    }
}

/// Which group's statistics normalize a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormPolicy {
    #[default]
    PerCuer,
    PerGroup,
    Global,
}

impl NormPolicy {
    pub fn grouping(self) -> Grouping {
        match self {
            NormPolicy::PerCuer => Grouping::PerCuer,
            NormPolicy::PerGroup => Grouping::NormalVsDeaf,
            NormPolicy::Global => Grouping::All,
        }
    }

    pub fn key_for(self, row: &VowelMeasures) -> &str {
        match self {
            NormPolicy::PerCuer => &row.cuer_id,
            NormPolicy::PerGroup => hearing_key(row.hearing),
            NormPolicy::Global => ALL_KEY,
        }
    }
}

impl fmt::Display for NormPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormPolicy::PerCuer => "per-cuer",
            NormPolicy::PerGroup => "per-group",
            NormPolicy::Global => "global",
        })
    }
}

impl FromStr for NormPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-cuer" => Ok(NormPolicy::PerCuer),
            "per-group" => Ok(NormPolicy::PerGroup),
            "global" => Ok(NormPolicy::Global),
            other => Err(Error::UsageError(format!("unknown normalization policy '{other}'"))),
        }
    }
}

pub fn hearing_key(h: Hearing) -> &'static str {
    match h {
        Hearing::Normal => NORMAL_KEY,
        Hearing::Deaf => DEAF_KEY,
    }
}

/// Statistics for every non-empty group under `grouping`, ordered by key
/// (per-cuer), or NORMAL before DEAF.
pub fn descriptive_stats(table: &MeasureTable, grouping: Grouping) -> Result<Vec<GroupStats>> {
    if table.is_empty() {
        return Err(Error::EmptyGroup("table has no rows".into()));
    }
    let mut acc: BTreeMap<String, (Moments, Moments)> = BTreeMap::new();
    for r in &table.rows {
        let key = match grouping {
            Grouping::PerCuer => r.cuer_id.as_str(),
            Grouping::NormalVsDeaf => hearing_key(r.hearing),
            Grouping::All => ALL_KEY,
        };
        let e = acc.entry(key.to_string()).or_default();
        e.0.push(r.hpt);
        e.1.push(r.lvd);
    }
    let mut keys: Vec<String> = acc.keys().cloned().collect();
    if grouping == Grouping::NormalVsDeaf {
        keys.sort_by_key(|k| k != NORMAL_KEY);
    }
    keys.iter()
        .map(|k| {
            let (h, l) = &acc[k];
            GroupStats::from_moments(k, h, l)
        })
        .collect()
}

/// Statistics of the rows selected by `keep`, labelled `key`.
pub fn subset_stats(
    table: &MeasureTable,
    key: &str,
    keep: impl Fn(&VowelMeasures) -> bool,
) -> Result<GroupStats> {
    let rows = table.rows.iter().filter(|r| keep(r));
    let (h, l): (Moments, Moments) = (
        rows.clone().map(|r| r.hpt).collect(),
        rows.map(|r| r.lvd).collect(),
    );
    GroupStats::from_moments(key, &h, &l)
}

/// The descriptive statistics CSV, in milliseconds rounded to whole units.
pub fn stats_to_csv(stats: &[GroupStats]) -> String {
    let mut out = String::from("group,mu_hpt_ms,sigma_hpt_ms,mu_lvd_ms,sigma_lvd_ms,syllable_count\n");
    for s in stats {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.group_key,
            (s.mu_hpt * 1000.0).round(),
            (s.sigma_hpt * 1000.0).round(),
            (s.mu_lvd * 1000.0).round(),
            (s.sigma_lvd * 1000.0).round(),
            s.count
        ));
    }
    out
}

pub fn zscore(x: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::DegenerateGroup(format!("sigma {sigma} is not positive")));
    }
    Ok((x - mu) / sigma)
}

/// log10 of a duration in seconds.
pub fn log_scale(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveInput(x));
    }
    Ok(x.log10())
}

/// The statistics and policy used to normalize a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormContext {
    pub policy: NormPolicy,
    pub groups: Vec<GroupStats>,
}

impl NormContext {
    /// Computes the statistics `policy` needs from `table`.
    pub fn fit(table: &MeasureTable, policy: NormPolicy) -> Result<NormContext> {
        Ok(NormContext {
            policy,
            groups: descriptive_stats(table, policy.grouping())?,
        })
    }

    pub fn stats_for(&self, row: &VowelMeasures) -> Result<&GroupStats> {
        let key = self.policy.key_for(row);
        self.groups
            .iter()
            .find(|g| g.group_key == key)
            .ok_or_else(|| Error::MissingStats(key.to_string()))
    }

    pub fn normalize_row(&self, row: &VowelMeasures) -> Result<Normalized> {
        let g = self.stats_for(row)?;
        Ok(Normalized {
            hpt_z: zscore(row.hpt, g.mu_hpt, g.sigma_hpt)?,
            lvd_z: zscore(row.lvd, g.mu_lvd, g.sigma_lvd)?,
            lve_log: log_scale(row.lve)?,
            lvi_log: log_scale(row.lvi)?,
        })
    }
}

/// Fills the normalized columns of every row using that row's group
/// statistics under `policy`.
pub fn normalize_table(
    table: &MeasureTable,
    stats: &[GroupStats],
    policy: NormPolicy,
) -> Result<MeasureTable> {
    let ctx = NormContext {
        policy,
        groups: stats.to_vec(),
    };
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.norm = Some(ctx.normalize_row(&r)?);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureTable {
        rows,
        norm: Some(ctx),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::LviSource;

    pub(crate) fn row(cuer: &str, hearing: Hearing, hpt: f64, lvd: f64) -> VowelMeasures {
        VowelMeasures {
            sentence_id: "s".into(),
            cuer_id: cuer.into(),
            hearing,
            index: 0,
            label: "a".into(),
            lip_mid: 1.0,
            hand_mid: 1.0 - hpt,
            hpt,
            lve: 0.5,
            lvi: 0.4,
            lvd,
            lvi_source: LviSource::Measured,
            norm: None,
        }
    }

    #[test]
    fn population_std_by_hand() {
        let table = MeasureTable {
            rows: [0.1, 0.2, 0.3]
                .iter()
                .map(|&h| row("NF1", Hearing::Normal, h, h + 0.2))
                .collect(),
            norm: None,
        };
        let s = &descriptive_stats(&table, Grouping::All).unwrap()[0];
        assert!((s.mu_hpt - 0.2).abs() < 1e-12);
        assert!((s.sigma_hpt - 0.081_649_658_092_772_6).abs() < 1e-12);
        assert_eq!(s.count, 3);
    }

    #[test]
    fn zscore_cases() {
        assert_eq!(zscore(0.242, 0.242, 0.177).unwrap(), 0.0);
        assert!((zscore(0.242 + 0.177, 0.242, 0.177).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(zscore(1.0, 0.0, 0.0), Err(Error::DegenerateGroup(_))));
    }

    #[test]
    fn log_scale_cases() {
        assert_eq!(log_scale(1.0).unwrap(), 0.0);
        let v = log_scale(0.457).unwrap();
        assert!((v - (-0.340_083_7)).abs() < 1e-6, "{v}");
        assert!(matches!(log_scale(0.0), Err(Error::NonpositiveInput(_))));
        assert!(log_scale(0.2).unwrap() < log_scale(0.21).unwrap());
    }

    #[test]
    fn degenerate_and_empty_groups() {
        let table = MeasureTable {
            rows: vec![row("A", Hearing::Normal, 0.1, 0.3), row("A", Hearing::Normal, 0.1, 0.4)],
            norm: None,
        };
        assert!(matches!(descriptive_stats(&table, Grouping::All), Err(Error::DegenerateGroup(_))));
        assert!(matches!(
            descriptive_stats(&MeasureTable::default(), Grouping::All),
            Err(Error::EmptyGroup(_))
        ));
        assert!(matches!(
            subset_stats(&table, DEAF_KEY, |r| r.hearing == Hearing::Deaf),
            Err(Error::EmptyGroup(_))
        ));
    }

    #[test]
    fn missing_stats_reported() {
        let table = MeasureTable {
            rows: vec![row("A", Hearing::Normal, 0.1, 0.3)],
            norm: None,
        };
        assert!(matches!(
            normalize_table(&table, &[], NormPolicy::PerCuer),
            Err(Error::MissingStats(k)) if k == "A"
        ));
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|k| ((k * 37) % 17) as f64 * 0.01 + 0.1).collect();
        let whole: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..33].iter().copied().collect();
        let b: Moments = xs[33..].iter().copied().collect();
        let merged = a.merge(&b);
        assert_eq!(merged.n, whole.n);
        assert!((merged.mean - whole.mean).abs() < 1e-14);
        assert!((merged.population_variance() - whole.population_variance()).abs() < 1e-14);
    }

    #[test]
    fn csv_rounds_to_ms() {
        let s = GroupStats {
            group_key: "NF1".into(),
            mu_hpt: 0.2424,
            sigma_hpt: 0.1768,
            mu_lvd: 0.338,
            sigma_lvd: 0.079,
            count: 10556,
        };
        assert_eq!(
            stats_to_csv(&[s]),
            "group,mu_hpt_ms,sigma_hpt_ms,mu_lvd_ms,sigma_lvd_ms,syllable_count\nNF1,242,177,338,79,10556\n"
        );
    }
}
