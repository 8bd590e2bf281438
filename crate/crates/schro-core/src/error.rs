use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} outside window [{lo}, {hi}]")]
    WindowViolation { index: i64, lo: i64, hi: i64 },

    #[error("window [{lo}, {hi}] is empty")]
    EmptyWindow { lo: i64, hi: i64 },

    #[error("windows do not align: [{a_lo}, {a_hi}] vs [{b_lo}, {b_hi}]")]
    WindowMismatch {
        a_lo: i64,
        a_hi: i64,
        b_lo: i64,
        b_hi: i64,
    },

    #[error("potential evaluated at {index}, below its origin {origin}")]
    BelowOrigin { index: i64, origin: i64 },

    #[error("non-finite value produced at index {index}")]
    NonFinite { index: i64 },

    #[error("backward recursion did not converge: tail-doubling agreement {achieved:e} worse than requested {requested:e}")]
    NonConvergence { achieved: f64, requested: f64 },

    #[error("zero Wronskian")]
    ZeroWronskian,

    #[error("Wronskian is not constant: {value} at index {index} vs {reference} at the left edge")]
    WronskianDrift {
        index: i64,
        value: f64,
        reference: f64,
    },

    #[error("zero value at index {index} where a nonzero value is required")]
    ZeroValue { index: i64 },

    #[error("|b| <= 2 at b = {b}: S - 1/S would vanish and the Wronski scaling breaks down")]
    DegenerateRoot { b: f64 },

    #[error("{what} must be positive at index {index}, got {value}")]
    NonPositive {
        what: &'static str,
        index: i64,
        value: f64,
    },

    #[error("{what} must be positive, got {value}")]
    NonPositiveParam { what: &'static str, value: f64 },

    #[error("no index in range brings the contraction tail sum below {target}")]
    ContractionNotFound { target: f64 },

    #[error("tail sum {kappa} at start index {start} is not a contraction (needs < 1)")]
    NotAContraction { kappa: f64, start: i64 },

    #[error("tolerance {tol:e} not reached within the {budget}-iteration bound; the window is likely truncated too aggressively")]
    IterationBudget { tol: f64, budget: usize },

    #[error("triangular product vanished at index {index}")]
    VanishingProduct { index: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
