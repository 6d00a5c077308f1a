use std::fmt;

use qdcascade::Error;

/// Non-zero process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub status: ExitStatus,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::Usage, message: message.into() }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self { status: ExitStatus::Data, message: message.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::Domain(_) => ExitStatus::Usage,
            Error::Numerical(_) | Error::DegenerateSteadyState { .. } => ExitStatus::Numerical,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::EmptyChannel(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Shape { .. }
            | Error::State(_) => ExitStatus::Data,
        };
        Self { status, message: e.to_string() }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

/// Errors while reading inputs are data errors whatever their kind.
pub trait InputContext<T> {
    fn input(self, what: &str) -> Outcome<T>;
}

impl<T> InputContext<T> for qdcascade::Result<T> {
    fn input(self, what: &str) -> Outcome<T> {
        self.map_err(|e| Failure::data(format!("{what}: {e}")))
    }
}
