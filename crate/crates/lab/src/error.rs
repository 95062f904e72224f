use std::io;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    #[error("verification failed: {bound}: {detail}")]
    Verification { bound: String, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Cli(#[from] clap::Error),

    #[error(transparent)]
    Core(#[from] rmtlab_core::Error),
}

impl LabError {
    pub fn format(what: &'static str, detail: impl Into<String>) -> Self {
        LabError::Format {
            what,
            detail: detail.into(),
        }
    }

    pub fn verification(bound: impl Into<String>, detail: impl Into<String>) -> Self {
        LabError::Verification {
            bound: bound.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code: 1 for a failed verification or a runtime fault,
    /// 2 for anything the caller can fix by changing the invocation or inputs.
    pub fn exit_code(&self) -> i32 {
        use rmtlab_core::Error as E;
        match self {
            LabError::Cli(e) => e.exit_code(),
            LabError::Verification { .. } | LabError::Io(_) | LabError::Csv(_) => 1,
            LabError::Core(E::NonConvergence { .. }) => 1,
            LabError::Usage(_) | LabError::Format { .. } | LabError::Core(_) => 2,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
