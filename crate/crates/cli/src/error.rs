use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}: parse error at line {line}, column {column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown task `{0}`")]
    UnknownTask(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("at grid point {index}: {source}")]
    Compute { index: usize, source: hforge_core::Error },

    #[error("{0}")]
    Core(#[from] hforge_core::Error),

    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit status; 1 is reserved for a completed run that fails its
    /// tolerance and 2 for command-line usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 3,
            CliError::UnknownTask(_) => 4,
            CliError::UnboundVariable(_) => 5,
            CliError::Config(_) => 6,
            CliError::Compute {
                source: hforge_core::Error::UnboundVariable(_),
                ..
            } => 5,
            CliError::Core(hforge_core::Error::UnboundVariable(_)) => 5,
            CliError::Compute { .. } | CliError::Core(_) => 7,
            CliError::Io(_) => 8,
        }
    }

    pub(crate) fn expression(name: &str, e: hforge_core::Error) -> Self {
        match e {
            hforge_core::Error::Parse { line, column, message } => CliError::Parse {
                source_name: format!("expression `{name}`"),
                line,
                column,
                message,
            },
            other => CliError::Core(other),
        }
    }
}
