use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("ghost cells not filled for the current interior values")]
    GhostsNotFilled,

    #[error("operator too large to assemble: {unknowns} unknowns exceeds cap {cap}")]
    TooLarge { unknowns: usize, cap: usize },

    #[error("discrete incompressibility violated: max residual {residual:e} (limit {limit:e})")]
    Incompressibility { residual: f64, limit: f64 },

    #[error("linear solver did not converge: relative residual {residual:e} after {iterations} iterations (tol {tol:e})")]
    SolverDivergence {
        residual: f64,
        iterations: usize,
        tol: f64,
    },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("eigensolver did not converge: {converged} of {wanted} pairs after {iterations} block steps")]
    EigenDivergence {
        converged: usize,
        wanted: usize,
        iterations: usize,
    },

    #[error("non-finite value detected in {0}")]
    NonFinite(String),

    #[error("time step {dt:e} exceeds the CFL limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("{0}")]
    Precondition(String),

    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

impl Error {
    /// Process exit status: 1 for usage and configuration, 2 for numerics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SolverDivergence { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::EigenDivergence { .. }
            | Error::NonFinite(_)
            | Error::Incompressibility { .. }
            | Error::GhostsNotFilled => 2,
            _ => 1,
        }
    }
}
