use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entry count {got} does not match shape {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        got: usize,
    },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid Fock space dimension {0} (need at least 3 levels)")]
    InvalidDimension(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e}); try a larger truncation or different parameters")]
    SolverFailure { condition: f64 },

    #[error("steady state violates physicality: {0}")]
    Unphysical(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("truncation did not converge by dimension {max_dim}")]
    NotConverged {
        max_dim: usize,
        previous: Box<crate::steady::Observables>,
        last: Box<crate::steady::Observables>,
    },

    #[error("invalid grid axis: {0}")]
    InvalidAxis(String),

    #[error("unknown preset '{name}'; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
