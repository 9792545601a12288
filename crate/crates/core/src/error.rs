use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum GyroError {
    #[error("cyclotron frequency must be nonzero")]
    ZeroCyclotronFrequency,

    #[error("degenerate gyration (|v_perp| = 0) in {0}")]
    DegenerateGyration(&'static str),

    #[error("{what}: argument outside the admissible domain ({detail})")]
    Domain { what: &'static str, detail: String },

    #[error("{path}: {reason}")]
    InvalidParameter { path: String, reason: String },

    #[error("time step {dt:e} exceeds the stability limit {limit:e} ({which})")]
    StepTooLarge { dt: f64, limit: f64, which: &'static str },

    #[error("density became negative ({min:e} with max {max:e})")]
    NegativeDensity { min: f64, max: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl GyroError {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        GyroError::InvalidParameter {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        GyroError::Domain {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, GyroError>;

/// Shorthand for [`GyroError::invalid`].
pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> GyroError {
    GyroError::invalid(path, reason)
}
