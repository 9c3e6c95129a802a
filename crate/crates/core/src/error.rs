//! Error type shared by all solvers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("detection failed: {0}")]
    Detection(String),
    #[error("input error: {0}")]
    Input(String),
}
