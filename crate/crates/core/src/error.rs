//! Error type shared by every stage of the pipeline.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("target column `{0}` not found")]
    MissingTarget(String),

    #[error("non-binary target: column `{column}` row {row} holds `{value}`")]
    NonBinaryTarget {
        column: String,
        row: usize,
        value: String,
    },

    #[error("column `{column}` row {row}: `{value}` is not numeric")]
    Parse {
        column: String,
        row: usize,
        value: String,
    },

    #[error("no features survive threshold {0}")]
    NoFeaturesSurvive(f64),

    #[error("column `{0}` has no observed values")]
    FullyMissing(String),

    #[error("cannot stratify: {0}")]
    CannotStratify(String),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Divergence { epoch: usize },

    #[error("search budget exhausted without a finite score")]
    SearchExhausted,

    #[error("no qualifying path predicts class {0}")]
    NoQualifyingPath(u8),

    #[error("unsupported version: artifact schema {found}, this build reads up to {supported}")]
    UnsupportedVersion { found: u64, supported: u32 },

    #[error("artifact checksum mismatch (document corrupted or edited)")]
    ChecksumMismatch,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True when the failure traces back to the caller's data or files rather
    /// than to a numerical breakdown inside a fitting stage.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Divergence { .. } | Error::SearchExhausted => false,
            Error::Stage { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}

/// Attaches a stage name to errors raised while running a pipeline stage.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
