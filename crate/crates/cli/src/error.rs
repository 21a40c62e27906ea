//! CLI failures and their exit codes.

use dgl_core::DglError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    /// A precondition outside the library types (names the precondition first).
    #[error("{0}")]
    Validation(String),
    #[error("{}: {}", precondition(_0), _0)]
    Core(#[from] DglError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

/// Which documented precondition a library error violates.
fn precondition(e: &DglError) -> &'static str {
    match e {
        DglError::Grid(_) => "Grid invariant",
        DglError::DecayCertificate(_) => "PotentialPair decay certificate",
        DglError::Dimension(_) => "Dimension agreement",
        DglError::NonFinite(_) => "Finite input",
        DglError::InvalidArgument(_) => "Argument precondition",
        DglError::State(_) => "Operator state",
        _ => "Numerical failure",
    }
}

impl CliError {
    /// `1` for input and validation problems, `2` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            CliError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }
}
