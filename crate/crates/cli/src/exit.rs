use std::fmt;

use resetdf::Error;

/// Process exit codes.
pub const OK: i32 = 0;
pub const USAGE: i32 = 2;
pub const CONVERGENCE: i32 = 3;
pub const VALIDATION: i32 = 4;
pub const NUMERICAL: i32 = 5;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, malformed matrices, unusable paths.
    Usage(String),
    /// Convergence gate failed or no steady state was reached.
    Convergence(String),
    /// Closed form and simulation disagree beyond tolerance.
    Validation(String),
    Numerical(Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => USAGE,
            CliError::Convergence(_) => CONVERGENCE,
            CliError::Validation(_) => VALIDATION,
            CliError::Numerical(_) => NUMERICAL,
        }
    }

    /// Errors from building an element are usage errors; anything later is numerical,
    /// except a steady state that never settles.
    pub fn from_build(flag: &str, e: Error) -> Self {
        CliError::Usage(format!("{flag}: {e}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => CliError::Convergence(e.to_string()),
            e => CliError::Numerical(e),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Convergence(m) => write!(f, "convergence: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
