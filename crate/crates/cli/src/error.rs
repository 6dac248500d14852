use std::fmt;

use ymblowup::Error;

/// Command failure, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or input files (exit 2).
    Config(String),
    /// Numerical breakdown inside a module (exit 3).
    Numerical(String),
    /// A search finished without a conclusive answer (exit 4).
    Inconclusive(String),
    /// Could not write artifacts (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Inconclusive(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    /// Wraps a module error with the name of the step that raised it.
    pub fn from_core(context: &str, e: Error) -> CliError {
        let msg = format!("{context}: {e}");
        match e {
            Error::Input(_) => CliError::Config(msg),
            Error::Inconclusive(_) | Error::Refinement { .. } => CliError::Inconclusive(msg),
            Error::DegenerateLambda { .. }
            | Error::Integration { .. }
            | Error::Resolution(_)
            | Error::StepSize(_)
            | Error::Fit(_)
            | Error::Divergence { .. }
            | Error::OutOfRegime(_)
            | Error::Detection(_) => CliError::Numerical(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical breakdown: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
