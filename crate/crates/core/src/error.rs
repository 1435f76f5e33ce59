use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero in F_p")]
    DivisionByZero,

    #[error("capacity exceeded: {what} does not fit below {limit}")]
    Capacity { what: String, limit: String },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("ring context mismatch: {0}")]
    RingMismatch(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("computation budget exceeded: {0}")]
    Budget(String),

    #[error("precision {have} insufficient; at least {required} required")]
    Precision { have: usize, required: usize },
}

impl Error {
    /// Coarse classification used for process exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Budget(_) | Error::Capacity { .. } => ErrorKind::Budget,
            _ => ErrorKind::Precondition,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Precondition,
    Budget,
}

pub type Result<T> = std::result::Result<T, Error>;
