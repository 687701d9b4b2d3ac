use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown {modality} transform `{name}`")]
    UnknownTransform { modality: &'static str, name: String },

    #[error("invalid parameters for `{op}`: {reason}")]
    Validation { op: String, reason: String },

    #[error("`{op}` failed: {reason}")]
    Transform { op: String, reason: String },

    #[error("cannot compute intensity of `{op}`: {reason}")]
    Intensity { op: String, reason: String },

    #[error("asset error: {0}")]
    Asset(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(op: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            op: op.into(),
            reason: reason.into(),
        }
    }

    pub fn failed(op: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Transform {
            op: op.into(),
            reason: reason.into(),
        }
    }

    /// True for errors that are the caller's fault (bad config or params)
    /// rather than I/O or runtime failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::UnknownTransform { .. } | Error::Validation { .. } | Error::Intensity { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
