//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain (non-finite, wrong sign, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A structurally valid input hits a degenerate corner where the model
    /// breaks down (e.g. one state-conditioned loss rate exactly zero).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// Nonlinear least squares ran out of iterations. Carries the best
    /// parameters seen so far for diagnosis.
    #[error("fit did not converge after {iterations} iterations (residual rms {residual_rms:.3e})")]
    FitDiverged {
        iterations: usize,
        residual_rms: f64,
        best_params: Vec<f64>,
    },

    /// The fit converged but a parameter is not constrained by the data.
    #[error("unidentifiable parameter: {0}")]
    Unidentifiable(String),

    /// A decay trace does not lose enough population to resolve a rate.
    #[error("insufficient decay: {0}")]
    InsufficientDecay(String),

    /// A master-equation run tripped a validity alarm (truncation occupancy,
    /// trace drift, negativity).
    #[error("simulation alarm: {0}")]
    SimAlarm(String),
}
