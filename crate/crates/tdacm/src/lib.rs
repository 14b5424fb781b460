//! File formats, reports and the command-line front end for `tdacm-core`.
//!
//! - [`config`]: versioned JSON scenario files.
//! - [`export`]: trajectory CSV writer and parser.
//! - [`report`]: metric tables and `metrics.json`.
//! - [`cli`]: the `tdacm` binary.

pub mod cli;
pub mod config;
pub mod export;
pub mod report;

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] tdacm_core::Error),
    #[error("logs are not comparable: '{left}' and '{right}' differ in timing")]
    Timing { left: String, right: String },
    #[error("run '{scenario}' stopped: {source}")]
    Run {
        scenario: String,
        #[source]
        source: tdacm_core::Error,
    },
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type AppResult<T> = Result<T, AppError>;
