use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("manifest syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: parse error at column {column}: {message}")]
    Expression {
        path: String,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("report: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] phwc::Error),
}

impl CliError {
    pub fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status for this error: everything here is a usage or
    /// input problem.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
