use thiserror::Error;

use crate::types::Label;

/// Errors raised across the tracking and planning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported window kind `{0}`")]
    UnsupportedWindow(String),

    #[error("object and observer positions coincide")]
    CoincidentPositions,

    #[error("object at {distance} m is inside the {reference} m reference distance")]
    InsideReferenceDistance { distance: f64, reference: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("value {value} out of range [{min}, {max})")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("influence regions of labels {0} and {1} overlap")]
    OverlappingRegions(Label, Label),

    #[error("label {0} is already present")]
    LabelCollision(Label),

    #[error("label {0} has no transmitter entry")]
    UnknownLabel(Label),

    #[error("particle weights are degenerate (all zero or non-finite)")]
    DegenerateWeights,

    #[error("beliefs are not defined on a shared support: {0}")]
    SupportMismatch(String),

    #[error("inner product of densities is zero; divergence undefined")]
    DegenerateSupport,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
