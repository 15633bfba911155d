use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("backward pass for {0} called without its forward cache")]
    MissingCache(&'static str),

    #[error("training diverged at epoch {epoch}, batch {batch} (loss = {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Model(#[from] ModelFileError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Errors raised while ingesting a dataset CSV.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing header: expected `t,vm_1..vm_n,va_1..va_n`")]
    MissingHeader,

    #[error("malformed header: {0}")]
    BadHeader(String),

    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column `{column}`: cannot parse `{cell}` as a number")]
    NonNumeric {
        line: u64,
        column: String,
        cell: String,
    },

    #[error("line {line}, column `{column}`: value is not finite")]
    NonFiniteCell { line: u64, column: String },

    #[error("series has {found} rows, need at least {needed}")]
    TooShort { found: usize, needed: usize },

    #[error("csv: {0}")]
    Csv(String),
}

/// Errors raised while decoding a model file.
#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a gridcast model file: {0}")]
    Format(String),

    #[error("unsupported model format version {found} (this build reads {supported})")]
    Version { found: u32, supported: u32 },

    #[error("model file is truncated")]
    Truncated,

    #[error("parameter `{name}` has {found} values, config implies {expected}")]
    ParamShape {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("model file is missing parameter `{0}`")]
    MissingParam(String),

    #[error("model file has unexpected parameter `{0}`")]
    UnexpectedParam(String),
}
