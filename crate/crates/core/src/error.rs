use std::path::PathBuf;

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("missing column `{0}` in data header")]
    MissingColumn(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("row {row} duplicates the configuration of row {first}")]
    DuplicateConfiguration { row: usize, first: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("configuration is not part of the dataset")]
    UnknownConfiguration,

    #[error("unknown configuration id {0}")]
    UnknownId(usize),

    #[error("external measurement failed: {0}")]
    Command(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("cannot fit a model: {0}")]
    Fit(String),

    #[error("kernel matrix is not positive definite (jitter {jitter:e})")]
    NotPositiveDefinite { jitter: f64 },

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("candidate pool has {available} configurations, {required} required")]
    PoolTooSmall { available: usize, required: usize },

    #[error("cannot parse manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `true` for errors caused by bad user input rather than a failing run.
    ///
    /// The command-line tool maps these to exit code 1.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::MissingColumn(_)
                | Error::Row { .. }
                | Error::DuplicateConfiguration { .. }
                | Error::InvalidParams(_)
                | Error::Split(_)
                | Error::Dimension { .. }
                | Error::PoolTooSmall { .. }
                | Error::Manifest { .. }
                | Error::Csv(_)
        )
    }
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
