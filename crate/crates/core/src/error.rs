use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The document does not match the expected JSON shape.
    #[error("schema error: {0}")]
    Schema(String),

    /// The document parsed but violates a model invariant.
    #[error("invalid application: {0}")]
    InvalidModel(String),

    #[error("line {line}: {msg}")]
    TraceParse { line: u64, msg: String },

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("invalid generator parameters: {0}")]
    Generator(String),

    #[error("budget allocation: {0}")]
    Budget(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {what} has {got} hours, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
