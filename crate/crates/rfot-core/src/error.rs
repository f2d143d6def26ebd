//! Error types shared by the measure, cost, and kernel modules.

use thiserror::Error;

/// Validation and construction failures for core domain types.
#[derive(Debug, Error)]
pub enum CoreError {
    /// The two measures live in different ambient dimensions.
    #[error("dimension mismatch: left measure has d = {left}, right has d = {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A vector passed to an operator has the wrong length.
    #[error("length mismatch in {context}: expected {expected}, got {got}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A measure must carry at least one support point.
    #[error("measure has no support points")]
    EmptyMeasure,

    /// Points must live in R^d with d >= 1.
    #[error("points must have dimension d >= 1")]
    ZeroDimension,

    /// A point row does not match the dimension of the first point.
    #[error("point {index} has dimension {got}, expected {expected}")]
    RaggedPoint {
        index: usize,
        expected: usize,
        got: usize,
    },

    /// Weights must be strictly positive and finite.
    #[error("weight {index} must be strictly positive and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },

    /// Weights must sum to one within the stated tolerance.
    #[error("weights sum to {sum}, expected 1 within {tol}")]
    WeightSum { sum: f64, tol: f64 },

    /// A coordinate is NaN or infinite.
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },

    /// Entropic regularization must be strictly positive.
    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),

    /// The log-dot cost -eps * log(x^T y) is undefined for non-positive dots.
    #[error("inner product of points {i} and {j} is {value}, but the log-dot cost requires it to be strictly positive")]
    NonPositiveDot { i: usize, j: usize, value: f64 },

    /// Feature vectors must be non-empty.
    #[error("feature vectors must be non-empty")]
    EmptyFeature,

    /// The cost of a feature pair -eps * log(phi_x^T phi_y) needs a positive dot.
    #[error("feature inner product is {value}, but the feature cost requires it to be strictly positive")]
    NonPositiveFeatureDot { value: f64 },

    /// A kernel or embedding matrix contains a negative or non-finite entry.
    #[error("{context} entry ({row}, {col}) is {value}; entries must be finite and nonnegative")]
    InvalidEntry {
        context: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    /// The pairwise feature cost has no closed-form matrix; callers should
    /// embed the points and build the factorized kernel instead.
    #[error("cost kind `from_features` has no pointwise cost matrix; embed the measures and use `cost_matrix_from_embeddings`")]
    FeatureCostNeedsEmbeddings,
}

/// Failures while reading or writing measures on disk.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),

    #[error("row {row}, column {col}: `{field}` is not a float")]
    BadField {
        row: usize,
        col: usize,
        field: String,
    },

    #[error("file contains no data rows")]
    NoRows,

    #[error(transparent)]
    Invalid(#[from] CoreError),
}
