use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectral parameter {lambda} lies on the closed negative real axis")]
    OutsideResolventSet { lambda: Complex64 },

    #[error("|lambda| = {magnitude} is not above the required threshold {required} (or |arg| >= pi/2)")]
    BelowThreshold { magnitude: f64, required: f64 },

    #[error("series did not reach tolerance after {terms} terms (last tail bound {tail:e})")]
    ConvergenceFailure { terms: usize, tail: f64 },

    #[error("contraction estimate {measured} is not below 1/2")]
    ContractionTooLarge { measured: f64 },

    #[error("singular shifted system: zero pivot at row {row} (condition estimate {condition:e})")]
    Singular { row: usize, condition: f64 },

    #[error("residual {residual:e} exceeds tolerance {tolerance:e} (condition estimate {condition:e})")]
    IllConditioned {
        residual: f64,
        tolerance: f64,
        condition: f64,
    },

    #[error("dense exponential requested for {size} unknowns (limit {limit})")]
    TooLargeForDense { size: usize, limit: usize },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("oscillation {oscillation} of Gamma on box {patch:?} is not below target {target}")]
    OscillationTargetUnmet {
        patch: Vec<usize>,
        oscillation: f64,
        target: f64,
    },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}
