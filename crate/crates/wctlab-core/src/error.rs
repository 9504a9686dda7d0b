//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the simulation, dataset, and training layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or parameter combination.
    #[error("configuration error: {0}")]
    Config(String),

    /// A persisted file failed validation; `field` names the offending part.
    #[error("format error in {path}: {field}: {reason}")]
    Format {
        path: String,
        field: String,
        reason: String,
    },

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}: {reason}")]
    Diverged { epoch: usize, reason: String },

    /// I/O failure while reading or writing an artifact.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(
        path: impl Into<String>,
        field: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Format {
            path: path.into(),
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
