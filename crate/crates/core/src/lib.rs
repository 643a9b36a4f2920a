//! Dynamic-regression tests of uncovered interest parity.
//!
//! The toolkit estimates the two classic weekly parity regressions (spot
//! return on forward premium, and forward forecast error on its own lag)
//! under overlapping contracts, where the errors follow a known
//! moving-average process. It provides:
//!
//! * [`series`] — CSV ingestion, alignment, and sample construction;
//! * [`ols`] — least squares with sandwich covariances and t-tests;
//! * [`hac`] — five robust long-run covariance estimators (truncated
//!   band, Newey-West, Andrews QS, fixed-b Kiefer-Vogelsang, equal
//!   weighted cosine);
//! * [`maproc`] — overlap autocorrelations, MA spectral factorization,
//!   filter inversion, and simulation;
//! * [`dynreg`] — the dynamic regression with BIC lag selection, its
//!   filtered restricted variant, the likelihood-ratio test, and rolling
//!   estimation;
//! * [`montecarlo`] — a deterministic, parallel size/power harness.

pub mod dynreg;
pub mod error;
pub mod hac;
pub mod linalg;
pub mod maproc;
pub mod montecarlo;
pub mod ols;
pub mod series;

pub use error::{Error, Result};
