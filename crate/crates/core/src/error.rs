use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates an invariant of the named component.
    #[error("invalid {component}: {message}")]
    Config {
        component: &'static str,
        message: String,
    },

    /// Malformed configuration text.
    #[error("parse error at line {line}{}: {message}", key.as_ref().map(|k| format!(" (key `{k}`)")).unwrap_or_default())]
    Parse {
        line: usize,
        key: Option<String>,
        message: String,
    },

    /// An input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The frequency grid cannot resolve the etalon comb.
    #[error("grid spacing {spacing:.4} rad/ps exceeds the resolution limit {limit:.4} rad/ps (FSR/8)")]
    Resolution { spacing: f64, limit: f64 },

    /// The oracle or model does not cover this configuration.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A numerical self-consistency check failed.
    #[error("numerical consistency failure in {check}: {detail}")]
    Consistency { check: &'static str, detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(component: &'static str, message: impl Into<String>) -> Self {
        Error::Config {
            component,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::Parse { .. }
            | Error::Domain(_)
            | Error::Resolution { .. }
            | Error::Unsupported(_) => 1,
            Error::Consistency { .. } => 2,
            Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(what: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {value}")))
    }
}
