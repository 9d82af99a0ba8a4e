use thiserror::Error;

/// Errors raised by the estimation library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count {n} out of range 1..={max}")]
    ModeRange { n: usize, max: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("oracle channel unavailable: {0}")]
    Capability(String),

    #[error("optimization failure: {0}")]
    Optimization(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ModeRange { .. } | Error::Domain(_) | Error::Capability(_) => 2,
            Error::Optimization(_) | Error::Quadrature(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
