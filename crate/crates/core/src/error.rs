use thiserror::Error;

use crate::inverse::InverseEstimate;

/// Errors produced by the estimation and testing routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lag {lag} out of range for a series of length {n}")]
    InvalidLag { lag: isize, n: usize },

    #[error("bandwidth M = {m} out of range ({reason})")]
    InvalidBandwidth { m: usize, reason: String },

    #[error("VAR order {order} too large for {n} observations")]
    InvalidOrder { order: usize, n: usize },

    #[error("sparse VAR fit failed for row {row}: {reason}")]
    FitFailure { row: usize, reason: String },

    #[error("filter transfer function is near-singular at omega = {omega} (condition {condition:e})")]
    SingularTransfer { omega: f64, condition: f64 },

    #[error("CLIME program infeasible for lambda = {lambda}")]
    InfeasiblePenalty { lambda: f64 },

    #[error("graphical lasso did not converge after {sweeps} sweeps")]
    ConvergenceFailure {
        sweeps: usize,
        last: Box<InverseEstimate>,
    },

    #[error("frequency grid is empty: {0}")]
    EmptyGrid(String),

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("degenerate inverse spectral estimate: {0}")]
    DegenerateInverse(String),

    #[error("model generation failed: {0}")]
    GenerationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
