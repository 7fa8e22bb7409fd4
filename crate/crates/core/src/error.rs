use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("lattice sizing: {0}")]
    Sizing(String),

    #[error("probability {probability:.3e} reached the lattice edge at step {step}")]
    EdgeOverflow { step: usize, probability: f64 },

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("outside the k-space oracle's domain: {0}")]
    OracleDomain(String),

    #[error("plan file {path}: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
