//! Lip-hand re-synchronization for Cued Speech.
//!
//! The crate turns paired acoustic (lip) and hand-gesture annotations into
//! per-vowel timing measures, normalizes them per cuer, fits the piecewise
//! hand preceding time (HPT) model and scores predicted hand target instants
//! against ground truth.
//!
//! | module | role |
//! |---|---|
//! | [`annot_io`] | TextGrid / EAF / landmark CSV / canonical JSON I/O |
//! | [`measures`] | HPT, LVE, LVI and LVD per vowel |
//! | [`normalize`] | descriptive statistics, z-score and log scaling |
//! | [`regression`] | `f0`, `f1`, `f2` fits and HPT predictors |
//! | [`evaluate`] | e_HPT, MHCD, polar positions, split, classifier proxy |
//! | [`synth`] | seeded synthetic corpora with known ground truth |
//! | [`config`] | run configuration and provenance hash |
//! | [`cli`] | the `cuesync` command line |

pub mod annot_io;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod measures;
pub mod normalize;
pub mod regression;
pub mod synth;

pub use error::{Error, Result};
