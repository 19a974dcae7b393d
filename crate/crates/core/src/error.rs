use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a physical law.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid or inconsistent configuration; `key` names the offending entry.
    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The reference channel has zero energy, so a normalised quantity is undefined.
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt dictionary cache {}: {reason}", path.display())]
    CorruptCache { path: PathBuf, reason: String },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
