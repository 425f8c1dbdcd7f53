use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced while loading inputs or writing outputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed document. `line`/`column` come from the JSON reader.
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed document that violates a schema or domain invariant.
    #[error("{origin}: {context}: {message}")]
    Validation {
        origin: String,
        context: String,
        message: String,
    },

    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: &str, err: &serde_json::Error) -> Self {
        Error::Parse {
            origin: origin.to_string(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub(crate) fn validation(
        origin: &str,
        context: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            origin: origin.to_string(),
            context: context.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Rejects documents whose format `version` differs from what this build reads.
pub(crate) fn check_format_version(origin: &str, found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::validation(
            origin,
            "version",
            format!("unsupported format version {found:?} (expected {expected:?})"),
        ))
    }
}
