use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad class of a failure, used by frontends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    #[error("language undeterminable: {0}")]
    Undeterminable(String),

    #[error("unknown genre `{0}`")]
    UnknownGenre(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("record `{0}` has no embeddable sentence")]
    Unembeddable(String),

    #[error("provider contract violated: {0}")]
    ProviderContract(String),

    #[error("provider request failed: {0}")]
    Provider(String),

    #[error("embedding file format: {0}")]
    Format(String),

    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,

    #[error("training labels contain a single class")]
    DegenerateLabels,

    #[error("non-finite feature value in row {0}")]
    NonFinite(usize),

    #[error("cannot stratify {class_size} examples of one class into {folds} folds")]
    Stratification { class_size: usize, folds: usize },

    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("class `{0}` has no examples")]
    EmptyClass(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("cell {train} -> {test} is missing genres: {missing:?}")]
    IncompleteCell {
        train: String,
        test: String,
        missing: Vec<String>,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of what was being done.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn category(&self) -> Category {
        match self {
            Error::Config(_) | Error::UnknownGenre(_) => Category::Usage,
            Error::DegenerateLabels
            | Error::NonFinite(_)
            | Error::DimensionMismatch { .. }
            | Error::ProviderContract(_) => Category::Numeric,
            Error::Context { source, .. } => source.category(),
            _ => Category::Data,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
