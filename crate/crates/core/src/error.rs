use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate partition: cell {cell} has zero design mass")]
    DegeneratePartition { cell: usize },

    #[error("ill-conditioned Gram matrix on cell {cell} (degree {degree}): {detail}")]
    Conditioning {
        cell: usize,
        degree: usize,
        detail: String,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed record at line {line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
