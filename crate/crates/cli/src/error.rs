use std::fmt;
use std::process::ExitCode;

use nonloc_core::Error;

/// Failure classes with their exit statuses.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, configuration or output path: exit 2.
    Validation(String),
    /// The computation itself failed: exit 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Validation(_) => ExitCode::from(2),
            Self::Numerical(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Validation(m) => write!(f, "invalid input: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::InvalidParameter(_)
            | Error::Unsupported(_)
            | Error::GridMismatch
            | Error::Precondition(_)
            | Error::OutOfScope(_) => Self::Validation(e.to_string()),
            Error::Integration(_)
            | Error::DegenerateFit(_)
            | Error::UnboundedTail(_)
            | Error::Projection(_)
            | Error::Divergence { .. }
            | Error::StepSize(_) => Self::Numerical(e.to_string()),
        }
    }
}
