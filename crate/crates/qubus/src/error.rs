use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] qubus_core::Error),
    #[error("peaks not resolved: {0}")]
    UnresolvedPeaks(String),
    #[error("verification failed: deviation {deviation:e} exceeds {tolerance:e}")]
    VerificationFailed { deviation: f64, tolerance: f64 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed input: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
