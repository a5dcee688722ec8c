//! Error type shared across the crate.
//!
//! Variants are split by who is at fault: `Parameter` and `Spec` mean the
//! caller handed us something invalid (bad weights, unknown component names),
//! `State` means a game state violated a precondition at evaluation time,
//! `Schema`/`Config` mean an input file could not be understood, and `Empty`
//! means an input had no usable rows. CLI consumers map `Parameter`, `Spec`
//! and `Config` onto usage errors (exit 1) and the rest onto data errors
//! (exit 2).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric or structural argument is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A reward spec failed validation at load time.
    #[error("invalid reward spec: {0}")]
    Spec(String),

    /// A game state violated an evaluation precondition.
    #[error("invalid state: {0}")]
    State(String),

    /// An input table is missing a required column.
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),

    /// An input file parsed but its shape is wrong.
    #[error("schema error: {0}")]
    Schema(String),

    /// A config file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// An input had no usable content.
    #[error("empty input: {0}")]
    Empty(String),

    /// An unsupported export or file format was requested.
    #[error("unsupported format: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors a CLI should report as usage mistakes rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parameter(_) | Error::Spec(_) | Error::Config(_) | Error::Format(_)
        )
    }
}
