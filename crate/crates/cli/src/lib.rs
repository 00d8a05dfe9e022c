//! Config-driven experiment runners behind the `anyonpt` binary.

pub mod config;
pub mod output;
pub mod runners;

use std::fmt;

pub use config::{ExperimentConfig, Experiment};
pub use output::OutputSet;
pub use runners::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunError {
    pub kind: ErrorKind,
    pub message: String,
}

impl RunError {
    pub fn config(message: impl Into<String>) -> Self {
        RunError {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        RunError {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        RunError {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    pub fn context(self, ctx: impl fmt::Display) -> Self {
        RunError {
            kind: self.kind,
            message: format!("{ctx}: {}", self.message),
        }
    }

    /// 2 for configuration errors, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Config => "config error",
            ErrorKind::Numerical => "numerical error",
            ErrorKind::Io => "i/o error",
        };
        write!(f, "{kind}: {}", self.message)
    }
}

impl std::error::Error for RunError {}

impl From<anyonpt_core::Error> for RunError {
    fn from(e: anyonpt_core::Error) -> Self {
        match e {
            anyonpt_core::Error::Io(_) => RunError::io(e.to_string()),
            other => RunError::numerical(other.to_string()),
        }
    }
}
