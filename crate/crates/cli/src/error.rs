use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] kendall_core::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("ties detected in column '{column}'{}; --jitter <eps> adds deterministic noise to break them",
            value.map(|v| format!(" (value {v} appears more than once)")).unwrap_or_default())]
    Ties { column: String, value: Option<f64> },

    #[error("no data rows in {0}")]
    EmptyFile(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for numerical degeneracy, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
