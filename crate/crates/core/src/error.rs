use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate heading: vector norm is below {threshold}")]
    DegenerateHeading { threshold: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid map data: {0}")]
    InvalidMap(String),

    #[error("trajectory too short for acceleration: {0} speed sample(s), need at least 2")]
    TooShortForAcceleration(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("insufficient modes: need at least {needed}, got {got}")]
    InsufficientModes { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data consistency: {0}")]
    DataConsistency(String),

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("internal invariant failure: {0}")]
    Internal(String),
}

/// Coarse error classes; the CLI maps them onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Schema,
    DataConsistency,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Schema => 2,
            ErrorKind::DataConsistency => 3,
            ErrorKind::Internal => 4,
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Usage,
            Error::Schema { .. }
            | Error::InvalidGeometry(_)
            | Error::InvalidMap(_)
            | Error::InvalidConfig(_) => ErrorKind::Schema,
            Error::DataConsistency(_) | Error::Shape(_) | Error::InsufficientModes { .. } => {
                ErrorKind::DataConsistency
            }
            Error::DegenerateHeading { .. }
            | Error::TooShortForAcceleration(_)
            | Error::Internal(_) => ErrorKind::Internal,
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl ToString) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Re-labels geometry/map/config failures raised while building a document
    /// as schema errors at `path`; other errors pass through.
    pub(crate) fn at(self, path: impl Into<String>) -> Self {
        match self {
            Error::InvalidGeometry(m)
            | Error::InvalidMap(m)
            | Error::InvalidConfig(m)
            | Error::Shape(m) => Error::schema(path, m),
            Error::TooShortForAcceleration(_) | Error::DegenerateHeading { .. } => {
                let message = self.to_string();
                Error::schema(path, message)
            }
            other => other,
        }
    }
}
