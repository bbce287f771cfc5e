use std::fmt;

use qhitting_core::Error;

pub const PARSE: u8 = 1;
pub const MAP_INVALID: u8 = 2;
pub const PRECONDITION: u8 = 3;
pub const SELFTEST: u8 = 4;
pub const NUMERIC: u8 = 5;

/// A message paired with the process exit code it maps to.
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(PARSE, message)
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Self::new(PRECONDITION, message)
    }

    pub fn invalid_map(message: impl Into<String>) -> Self {
        Self::new(MAP_INVALID, message)
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotStochastic { .. } | Error::NotTracePreserving { .. } | Error::NotIrreducible { .. } => {
                MAP_INVALID
            }
            Error::Dimension(_)
            | Error::InvalidArgument(_)
            | Error::InvalidDensity(_)
            | Error::TrivialSubspace { .. }
            | Error::Orthogonality { .. }
            | Error::SameState => PRECONDITION,
            Error::Singular { .. }
            | Error::NonConvergent { .. }
            | Error::StepCapExceeded { .. }
            | Error::Inconsistent { .. } => NUMERIC,
        };
        Self::new(code, e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
