use std::io;

/// Errors produced by the analysis library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("row {row}, column \"{column}\": {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}, column \"{column}\": non-finite value")]
    NonFinite { row: usize, column: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("channel \"{0}\" not found")]
    MissingChannel(String),

    #[error("duplicate channel name \"{0}\"")]
    DuplicateChannel(String),

    #[error("{context}: need at least {required} samples, got {actual}")]
    InsufficientData {
        context: &'static str,
        required: usize,
        actual: usize,
    },

    #[error("{context}: series has zero variance")]
    ZeroVariance { context: &'static str },

    #[error("lag overlap too small: need {required} aligned pairs, got {actual}")]
    InsufficientOverlap { required: usize, actual: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{context}: iteration failed to converge")]
    NoConvergence { context: &'static str },

    #[error("bad file format: {0}")]
    InvalidFormat(String),

    #[error("stage {stage}: {source}")]
    Pipeline {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Pipeline {
            stage,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
