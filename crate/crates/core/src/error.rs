use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file. `line` is 1-based; 0 when unknown.
    #[error("{}:{line}: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: u32,
        message: String,
    },

    /// A bracketed constituency tree that could not be read.
    #[error("bad parse tree at offset {offset}: {message}")]
    Tree { offset: usize, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no feasible phrase selection: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 2,
            Error::Infeasible(_) => 3,
            _ => 1,
        }
    }
}
