//! Error types for feature-map construction, sampling, and diagnostics.

use thiserror::Error;

/// Failures across the feature-map pipeline.
#[derive(Debug, Error)]
pub enum FeatureError {
    /// The principal Lambert branch is real only on [-1/e, inf).
    #[error("lambert_w0 is defined for x >= -1/e, got {0}")]
    OutOfDomain(f64),

    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("domain radius R must be strictly positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("points must have dimension d >= 1")]
    ZeroDimension,

    #[error("arccos features need sigma > 1, got {0}")]
    SigmaNotAboveOne(f64),

    #[error("arccos features need kappa > 0, got {0}")]
    NonPositiveKappa(f64),

    #[error("the number of sampled features r must be at least 1")]
    ZeroFeatures,

    /// Gaussian features are only guaranteed positive and unbiased on B(0, R).
    #[error("point {index} has norm {norm}, outside the domain ball of radius {radius}")]
    PointOutsideDomain {
        index: usize,
        norm: f64,
        radius: f64,
    },

    #[error("dimension mismatch: feature spec has d = {expected}, points have d = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0} must lie strictly inside (0, 1)")]
    InvalidProbability(&'static str),

    #[error("{argument} must be strictly positive and finite, got {value}")]
    NonPositiveArgument { argument: &'static str, value: f64 },

    /// The requested quantity has no formula or sampling law for this map.
    #[error("no {what} is available for this feature map")]
    UnsupportedSpec { what: &'static str },

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("theta file holds {got} floats, expected r*d = {expected}")]
    ThetaSizeMismatch { expected: usize, got: usize },
}
