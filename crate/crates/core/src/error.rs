use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("internal consistency error: {0}")]
    Consistency(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("training error: {0}")]
    Train(String),
    #[error("proposer transport error: {0}")]
    Transport(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a bug or environment failure.
    pub fn is_user_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Parse { .. } | Error::Input(_) | Error::Json(_))
    }
}
