//! Error type shared across the pipeline modules.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vocabulary is empty after applying the frequency floor {floor} to {docs} documents")]
    EmptyVocabulary { floor: u32, docs: usize },

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("held-out set has no non-empty documents")]
    EmptyHeldout,

    #[error("both classes must be present (got {present} only)")]
    SingleClass { present: &'static str },

    #[error("split would leave the {side} side empty")]
    EmptySplitSide { side: &'static str },

    #[error("labels ({labels}) do not align with matrix rows ({rows})")]
    MisalignedLabels { rows: usize, labels: usize },

    #[error("class {class} has {count} rows, fewer than {folds} folds; use fewer folds")]
    ClassSmallerThanFolds {
        class: &'static str,
        count: usize,
        folds: usize,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },
}
