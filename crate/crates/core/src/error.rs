use thiserror::Error;

/// Errors produced by the game, solver, and learner layers.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Shapes of matrices/strategies do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The restricted simplex { z : sum z = 1, z_i >= theta } is empty.
    #[error("restricted simplex is empty: theta = {theta} > 1/{dim}")]
    EmptyRestrictedSimplex { theta: f64, dim: usize },

    /// Invalid run or adversary configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The saddle solver hit its iteration cap before certifying the gap.
    #[error(
        "saddle solver stopped after {iterations} iterations: best gap {best_gap:.3e} > target {target:.3e}"
    )]
    NonConvergence {
        target: f64,
        best_gap: f64,
        iterations: u64,
    },
}

pub type Result<T> = std::result::Result<T, CoreError>;
