//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid truncation: n_max must be >= 1, got {0}")]
    InvalidTruncation(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nonpositive trap frequency: {0}")]
    NonPositiveTrapFrequency(f64),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("branch tracking ambiguous: best overlap {overlap:.4} below 0.5 (step too large)")]
    AmbiguousTracking { overlap: f64 },

    #[error("no resonance bracket found in scan window for n = {n}")]
    NoBracket { n: usize },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("degenerate steady-state manifold: null-space dimension {null_dim}")]
    DegenerateSteadyState { null_dim: usize },

    #[error("steady-state residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("density matrix violates positivity: min eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("propagator tolerance failure: {0}")]
    Integrator(String),

    #[error("correlation undefined: denominator below 1e-300")]
    UndefinedCorrelation,

    #[error("truncation too small: need n*k = {needed} <= n_max = {n_max}")]
    TruncationTooSmall { needed: usize, n_max: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code class: 2 config, 3 solver/numerics, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidTruncation(_)
            | Error::NonPositiveTrapFrequency(_)
            | Error::TruncationTooSmall { .. }
            | Error::DimensionMismatch(..) => 2,
            _ => 3,
        }
    }
}
