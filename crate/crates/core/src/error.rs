use std::fmt;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed JSON input.
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// The scenario parsed but broke one or more invariants.
    Invalid(Vec<Violation>),
    /// Normalization is undefined when every bid is zero in some column.
    DegenerateColumn {
        side: &'static str,
        column: usize,
    },
    /// Literal inverse-supply density with a zero supply component.
    InfiniteDensity {
        device: String,
    },
    /// Pricing asked about a task that did not win.
    NotAWinner {
        task: String,
    },
    UnknownAgent(String),
    InstanceTooLarge {
        states: u128,
        limit: u128,
    },
    InvalidArgument(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse {
                line,
                column,
                message,
            } => write!(f, "parse error at line {line}, column {column}: {message}"),
            Error::Invalid(violations) => {
                write!(f, "invalid scenario: ")?;
                for (k, v) in violations.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Error::DegenerateColumn { side, column } => {
                write!(
                    f,
                    "{side} column {column} has a zero maximum; cannot normalize"
                )
            }
            Error::InfiniteDensity { device } => {
                write!(
                    f,
                    "infinite density for device {device}: zero supply component"
                )
            }
            Error::NotAWinner { task } => write!(f, "task {task} did not win"),
            Error::UnknownAgent(id) => write!(f, "no task or device with id {id}"),
            Error::InstanceTooLarge { states, limit } => {
                write!(
                    f,
                    "instance too large: {states} states exceeds limit {limit}"
                )
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
