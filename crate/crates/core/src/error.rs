use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// A line of a record or model file could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parsed value violates a domain constraint.
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    /// A model file has a bad header, wrong magic, or inconsistent body.
    #[error("format error: {0}")]
    Format(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input collections that must line up do not.
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn validation(line: usize, message: impl Into<String>) -> Self {
        Error::Validation {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(message: impl Into<String>) -> Self {
        Error::Format(message.into())
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config(message.into())
    }
}
