//! Crate-wide error type.
//!
//! Every variant carries the name of the failure mode it represents, and
//! [`Error::name`] returns that name so command-line diagnostics can report
//! it verbatim.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // annotation I/O
    #[error("MalformedFile: {0}")]
    MalformedFile(String),
    #[error("NonmonotonicIntervals: tier '{tier}' interval {index}: {detail}")]
    NonmonotonicIntervals {
        tier: String,
        index: usize,
        detail: String,
    },
    #[error("DanglingTimeSlotRef: annotation '{annotation}' references undefined time slot '{slot}'")]
    DanglingTimeSlotRef { annotation: String, slot: String },
    #[error("CountMismatch: {lip} lip vowels vs {hand} hand vowels")]
    CountMismatch { lip: usize, hand: usize },
    #[error("LabelMismatch: index {index}: lip '{lip}' vs hand '{hand}'")]
    LabelMismatch {
        index: usize,
        lip: String,
        hand: String,
    },
    #[error("InvalidTimeline: {0}")]
    InvalidTimeline(String),
    #[error("NonmonotonicTime: frame {row} at {time} s does not follow {previous} s")]
    NonmonotonicTime { row: usize, time: f64, previous: f64 },
    #[error("SchemaViolation: {0}")]
    SchemaViolation(String),

    // measures
    #[error("NonmonotonicMidpoints: sentence '{sentence}' vowel {index}")]
    NonmonotonicMidpoints { sentence: String, index: usize },
    #[error("NonpositiveLve: sentence '{sentence}' vowel {index} has lip target at or after sentence end")]
    NonpositiveLve { sentence: String, index: usize },
    #[error("DuplicateSentence: cuer '{cuer}' sentence '{sentence}'")]
    DuplicateSentence { cuer: String, sentence: String },

    // normalize
    #[error("EmptyGroup: {0}")]
    EmptyGroup(String),
    #[error("DegenerateGroup: {0}")]
    DegenerateGroup(String),
    #[error("NonpositiveInput: {0}")]
    NonpositiveInput(f64),
    #[error("MissingStats: no statistics for group '{0}'")]
    MissingStats(String),

    // regression
    #[error("DegenerateDesign: predictor has zero variance")]
    DegenerateDesign,
    #[error("TooFewPoints: {0} points, need at least 2")]
    TooFewPoints(usize),
    #[error("EmptySide: gamma {gamma} leaves the {side} side with {count} usable rows")]
    EmptySide {
        gamma: f64,
        side: &'static str,
        count: usize,
    },
    #[error("UnfittedPredictor: {0}")]
    UnfittedPredictor(String),

    // evaluate
    #[error("TooFewSentences: cuer '{cuer}' has {count} sentences, need at least 5")]
    TooFewSentences { cuer: String, count: usize },
    #[error("LengthMismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("InstantOutOfRange: {instant} s outside track [{start}, {end}] s")]
    InstantOutOfRange { instant: f64, start: f64, end: f64 },
    #[error("MissingClass: training set has no sample of position class {0}")]
    MissingClass(u8),
    #[error("MissingTrack: no landmark track for cuer '{cuer}' sentence '{sentence}'")]
    MissingTrack { cuer: String, sentence: String },

    // synth
    #[error("InvalidProfile: {0}")]
    InvalidProfile(String),

    // cli
    #[error("UsageError: {0}")]
    UsageError(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Variant name, as used on the diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedFile(_) => "MalformedFile",
            Error::NonmonotonicIntervals { .. } => "NonmonotonicIntervals",
            Error::DanglingTimeSlotRef { .. } => "DanglingTimeSlotRef",
            Error::CountMismatch { .. } => "CountMismatch",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::InvalidTimeline(_) => "InvalidTimeline",
            Error::NonmonotonicTime { .. } => "NonmonotonicTime",
            Error::SchemaViolation(_) => "SchemaViolation",
            Error::NonmonotonicMidpoints { .. } => "NonmonotonicMidpoints",
            Error::NonpositiveLve { .. } => "NonpositiveLve",
            Error::DuplicateSentence { .. } => "DuplicateSentence",
            Error::EmptyGroup(_) => "EmptyGroup",
            Error::DegenerateGroup(_) => "DegenerateGroup",
            Error::NonpositiveInput(_) => "NonpositiveInput",
            Error::MissingStats(_) => "MissingStats",
            Error::DegenerateDesign => "DegenerateDesign",
            Error::TooFewPoints(_) => "TooFewPoints",
            Error::EmptySide { .. } => "EmptySide",
            Error::UnfittedPredictor(_) => "UnfittedPredictor",
            Error::TooFewSentences { .. } => "TooFewSentences",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InstantOutOfRange { .. } => "InstantOutOfRange",
            Error::MissingClass(_) => "MissingClass",
            Error::MissingTrack { .. } => "MissingTrack",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::UsageError(_) => "UsageError",
            Error::Io(_) => "Io",
        }
    }
}
