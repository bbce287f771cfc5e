use alloc::string::String;

use crate::maps::Verdict;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("column {column} is not stochastic: {reason}")]
    NotStochastic { column: usize, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("map is not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("map is not certified irreducible (verdict: {verdict:?})")]
    NotIrreducible { verdict: Verdict },

    #[error("arrival subspace must be nontrivial: rank {rank} in dimension {dim}")]
    TrivialSubspace { rank: usize, dim: usize },

    #[error("{which} violates the support condition (residual {residual:e})")]
    Orthogonality { which: &'static str, residual: f64 },

    #[error("linear system is singular to working precision (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("monitored evolution does not contract (spectral radius {spectral_radius})")]
    NonConvergent { spectral_radius: f64 },

    #[error("trajectory exceeded the step cap of {cap}")]
    StepCapExceeded { cap: u64 },

    #[error("initial and arrival state coincide; use the return time (Kac) instead")]
    SameState,

    #[error("internal consistency check failed: {what} (spread {spread:e})")]
    Inconsistent { what: &'static str, spread: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
