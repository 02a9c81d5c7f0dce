use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least {min} nodes, got {got}")]
    GridTooSmall { min: usize, got: usize },

    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),

    #[error("grid is not uniform at row {row}: step {step} differs from {expected}")]
    NonUniformGrid { row: usize, step: f64, expected: f64 },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch { what: &'static str, got: usize, expected: usize },

    #[error("singular block pivot at node {index} (|det| = {det:e})")]
    SingularPivot { index: usize, det: f64 },

    #[error("singular symbol system at w = {w} (scaled determinant {det:e})")]
    SingularSymbol { w: f64, det: f64 },

    #[error("wavenumber {w} is outside {domain}")]
    WavenumberOutOfRange { w: f64, domain: &'static str },

    #[error("rational fit is rank deficient: singular-value gap {gap:e}")]
    DegenerateFit { gap: f64 },

    #[error("rational fit does not reproduce the samples (relative misfit {misfit:e})")]
    PoorFit { misfit: f64 },

    #[error("weights have direction {got}, expected {expected}")]
    WrongDirection { got: &'static str, expected: &'static str },

    #[error("residual evaluation failed at perturbed coordinate {index}: {source}")]
    Perturbation {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Jacobian is singular and no damped step reduces the residual")]
    SingularJacobian,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
