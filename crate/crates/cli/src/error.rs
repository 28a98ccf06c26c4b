use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] msdenoise::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        source: csv::Error,
    },
    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },
    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    Ragged {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: non-finite value at row {row}, column {column}")]
    NonFinite {
        path: PathBuf,
        row: usize,
        column: usize,
    },
    #[error("{path}: no data rows")]
    NoRows { path: PathBuf },
    #[error("dataset {name}: expected {expected}, found {found}")]
    Shape {
        name: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
