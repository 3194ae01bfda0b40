//! Error types shared across the crate.

use thiserror::Error;

/// Library-level error.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural misuse: dimension or shape mismatches, invalid settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// A computation produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Caller-supplied data is invalid (e.g. a non-finite action).
    #[error("input error: {0}")]
    Input(String),

    /// The environment lacks a capability a caller requires.
    #[error("unsupported environment: {0}")]
    UnsupportedEnv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
