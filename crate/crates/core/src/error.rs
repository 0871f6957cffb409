use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value {value} at point ({x}, {z}) in {context}")]
    NonFinite {
        context: String,
        x: f64,
        z: f64,
        value: f64,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
