use hydrolim_core::CoreError;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    ReadFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    WriteFile {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid JSON in {path}: {message}")]
    Json { path: PathBuf, message: String },

    #[error("checkpoint error at byte {offset}: {reason}")]
    Checkpoint { offset: u64, reason: String },

    #[error("malformed CSV {path} line {line}: {reason}")]
    Csv {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("summary/CSV mismatch in {field} for eps = {eps}: {summary} vs recomputed {recomputed}")]
    SummaryMismatch {
        field: &'static str,
        eps: f64,
        summary: f64,
        recomputed: f64,
    },

    #[error(transparent)]
    Core(#[from] CoreError),
}
