use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON at `{field}`: {message}")]
    Config {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error("invalid argument `{arg}`: {message}")]
    Argument { arg: String, message: String },

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("{context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: cohpert::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("serializing report: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for cohpert::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Numeric { context: what(), source })
    }
}
