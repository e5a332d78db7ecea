//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced while parsing instances, building the relaxation, or
/// running the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("solver diverged: residual {0:.3e} exceeds 1e8")]
    Divergence(f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
