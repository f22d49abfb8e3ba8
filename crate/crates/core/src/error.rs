//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficients violate conjugate symmetry (max deviation {max_dev:.3e}, tolerance {tol:.3e})")]
    ConjugateSymmetry { max_dev: f64, tol: f64 },

    #[error("ball radius {t} does not embed in the torus (limit {limit})")]
    BallTooLarge { t: f64, limit: f64 },

    #[error("expected {expected} correction fields, got {got}")]
    CorrectionCount { expected: usize, got: usize },

    #[error("scale fit is ill-conditioned: {0}")]
    IllConditionedFit(String),

    #[error("quadrature did not converge: achieved {achieved:.3e} (requested {requested:.3e}), partial value {partial:.9e}")]
    QuadratureNonConvergence {
        achieved: f64,
        requested: f64,
        partial: f64,
    },

    #[error("fundamental-solution calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("invalid metric measure space: {0}")]
    InvalidSpace(String),
}

pub type Result<T> = std::result::Result<T, Error>;
