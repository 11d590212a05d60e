//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by extraction, estimation, simulation and ingestion.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or function was called with parameters outside its
    /// documented domain (e.g. `delta` outside `(0, 1)`, `m < 2`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An observation or data value violates a domain requirement
    /// (e.g. a non-positive or non-finite observation).
    #[error("domain error: {0}")]
    Domain(String),

    /// The stream never produced a first record above the activation
    /// threshold, so there is nothing to estimate from.
    #[error("no record above the activation threshold: {0}")]
    NotActivated(String),

    /// An estimator was asked for with zero usable blocks.
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// The maximum-likelihood estimate does not exist for this sample
    /// (the likelihood is maximized only in the limit of an infinite index).
    #[error("maximum-likelihood estimate does not exist: {0}")]
    MleNonexistent(String),

    /// A statistic is undefined because the sample it was given is
    /// degenerate for that statistic (e.g. all top order statistics equal).
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// Not enough data to carry out the requested computation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A simulated trial exceeded its raw-observation budget.
    #[error("trial aborted: raw observation cap of {cap} exceeded")]
    TrialAborted { cap: u64 },

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenient result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
