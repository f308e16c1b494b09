use std::path::PathBuf;

use schemanet::KernelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error{}{}: {message}", key.as_ref().map(|k| format!(" at key `{k}`")).unwrap_or_default(), line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { key: Option<String>, line: Option<usize>, message: String },
    #[error("scenario failure during {context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: KernelError,
    },
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("malformed artifact {}: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Scenario { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }

    pub(crate) fn scenario(context: impl Into<String>) -> impl FnOnce(KernelError) -> Self {
        let context = context.into();
        move |source| HarnessError::Scenario { context, source }
    }
}
