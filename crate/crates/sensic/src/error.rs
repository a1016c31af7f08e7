//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Construction errors are
//! reported eagerly (laws validate their parameters, weights validate their
//! supports) so that numerical code downstream never sees NaN or a silent
//! out-of-domain value.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor received an invalid parameter (bounds, weights, …).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A sample is statistically degenerate (constant column, zero variance).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// Two laws that must share a support interval do not.
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    /// A data point lies where the sampling density vanishes but the target
    /// density does not, so its importance ratio is undefined.
    #[error("support violation: {0}")]
    SupportViolation(String),

    /// Exhaustive enumeration was requested on a prior without finite support.
    #[error("enumeration unsupported: {0}")]
    UnsupportedEnumeration(String),

    /// Too many importance ratios hit the overflow cap; the weight
    /// distribution is too heavy-tailed for a V-statistic to be trusted.
    #[error("heavy-tailed importance weights: {0}")]
    HeavyTailWeights(String),

    /// A sample is too small for the requested estimator.
    #[error("sample too small: {0}")]
    SampleSize(String),

    /// A test statistic's moment estimates are unusable (nonpositive mean or
    /// variance), so no null distribution can be fitted.
    #[error("degenerate test statistic: {0}")]
    TestDegenerate(String),

    /// The simulator failed at a specific evaluation point.
    #[error("model evaluation failed at point {index}: {message}")]
    ModelEvaluation { index: usize, message: String },

    /// Run-configuration file is malformed or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// A CSV cell failed to parse or violated a declared constraint.
    #[error("csv error at row {row}, column {column}: {message}")]
    CsvData {
        /// 1-based data row (excluding the header).
        row: usize,
        /// Column name from the header.
        column: String,
        /// What went wrong.
        message: String,
    },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Helper for invalid-parameter errors.
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Helper for degenerate-sample errors.
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateSample(msg.into())
    }
}
