use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing channel {column}")]
    MissingChannel { path: PathBuf, column: &'static str },

    #[error("{path}: line {line}: expected {expected} fields, found {found}")]
    RaggedRow { path: PathBuf, line: u64, expected: u64, found: u64 },

    #[error("{path}: line {line}, column {column}: cannot parse {value:?} as a number")]
    BadCell { path: PathBuf, line: u64, column: String, value: String },

    #[error("{path}: malformed CSV: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("no ground truth values")]
    EmptyGroundTruth,

    #[error("recording has {len} samples, shorter than one window of {window} samples")]
    TooShort { len: usize, window: usize },

    #[error("channel length mismatch: {0}")]
    ChannelMismatch(String),

    #[error("spectrum length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty window")]
    EmptyWindow,

    #[error("no initial estimate: spectrum is all zero")]
    NoInitialEstimate,

    #[error("undefined correlation: zero variance")]
    UndefinedCorrelation,

    #[error("metric input: {0}")]
    MetricInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
