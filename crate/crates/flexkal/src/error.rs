//! Error type for the IO and runner layer.

use thiserror::Error;

/// Failures surfaced by trace files, config files, and the runners.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// A trace file failed to parse; `line` is 1-based and counts the
    /// header.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A config file failed to deserialize or carried invalid values.
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] flexkal_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
