use std::path::PathBuf;

use multiplace::explorer::ExplorerError;
use multiplace::StructureError;
use thiserror::Error;

/// Failure of a command, carrying its exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    /// 1 for domain failures (infeasible input, corrupted structure), 2 for
    /// usage, parse and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ExplorerError> for CliError {
    fn from(e: ExplorerError) -> Self {
        match e {
            ExplorerError::InvalidConfig(_)
            | ExplorerError::Bdio(multiplace::bdio::BdioError::InvalidSchedule(_)) => {
                CliError::Usage(e.to_string())
            }
            ExplorerError::Cost(multiplace::cost::CostError::InvalidWeights) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        CliError::Domain(e.to_string())
    }
}
