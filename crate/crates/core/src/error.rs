//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by data ingestion, estimation, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// CSV file could not be read at all.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// CSV-level failure outside any single row.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// A CSV row failed to parse.
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    /// A quoted price was zero or negative; the log transform is undefined.
    #[error("non-positive {field} ({value}) at line {line}")]
    NonPositivePrice {
        line: u64,
        field: &'static str,
        value: f64,
    },

    /// Two rows carry the same date.
    #[error("duplicate date {0}")]
    DuplicateDate(chrono::NaiveDate),

    /// Input file had a header but no data rows.
    #[error("empty input: no data rows")]
    EmptyInput,

    /// A required column is missing from the CSV header.
    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    /// Not enough observations for the requested operation.
    #[error("too few observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    /// Rolling window longer than the available sample.
    #[error("window of {window} exceeds sample length {len}")]
    WindowTooLarge { window: usize, len: usize },

    /// Regressor has (numerically) zero variance, e.g. the zero-premium
    /// corner where the forward equals the spot in every period.
    #[error("degenerate regressor: variance below tolerance")]
    DegenerateRegressor,

    /// Design matrix is rank deficient.
    #[error("rank-deficient design matrix (pivot {pivot} of {cols})")]
    RankDeficient { pivot: usize, cols: usize },

    /// A t-test was requested with a zero standard error.
    #[error("zero standard error")]
    ZeroStandardError,

    /// MA polynomial has a root on or inside the unit circle.
    #[error("non-invertible MA polynomial: root modulus {modulus}")]
    NonInvertible { modulus: f64 },

    /// Autocorrelation sequence is not attainable by any MA(m) process.
    #[error("autocorrelations infeasible for an MA({order}): factorization root on the unit circle (modulus {modulus})")]
    InfeasibleAutocorrelation { order: usize, modulus: f64 },

    /// Series shorter than the AR filter it should be convolved with.
    #[error("series of length {len} shorter than filter truncation {filter_len}")]
    SeriesTooShort { len: usize, filter_len: usize },

    /// The fitted AR polynomial sums to (numerically) zero, so the
    /// long-run coefficient is undefined.
    #[error("long-run coefficient undefined: phi(1) = {phi_one} is numerically zero")]
    UnitRootLongRun { phi_one: f64 },

    /// Likelihood-ratio test inputs were fitted on different samples.
    #[error("mismatched effective samples: static n = {static_n}, dynamic n = {dyn_n}")]
    MismatchedSamples { static_n: usize, dyn_n: usize },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
