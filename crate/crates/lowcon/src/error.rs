use std::path::PathBuf;

/// Harness failures, grouped by the process exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("column `{0}` not present in input")]
    ColumnMissing(String),
    #[error("no usable rows left after dropping {dropped} incomplete rows")]
    EmptyAfterFiltering { dropped: usize },
    #[error("data error: {0}")]
    Data(String),
    #[error("{failed} cell(s) failed after exhausting retries")]
    CellsFailed { failed: usize },
    #[error(transparent)]
    Numerical(#[from] lowcon_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::FileNotFound(_)
            | HarnessError::ColumnMissing(_)
            | HarnessError::EmptyAfterFiltering { .. }
            | HarnessError::Data(_)
            | HarnessError::Io(_)
            | HarnessError::Csv(_) => 3,
            HarnessError::CellsFailed { .. } | HarnessError::Numerical(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
