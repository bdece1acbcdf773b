use thiserror::Error;

/// Errors produced by the operator, solver, fit and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StroboError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: bandwidth of {bandwidth} grid steps is below the minimum of {min} (n_grid = {n_grid}, rho = {rho})")]
    Resolution {
        bandwidth: usize,
        min: usize,
        n_grid: usize,
        rho: f64,
    },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    Convergence { iterations: usize, last_change: f64 },

    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T, E = StroboError> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> StroboError {
    StroboError::Domain(msg.into())
}
