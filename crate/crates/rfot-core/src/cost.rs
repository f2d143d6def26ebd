//! Ground costs c(x, y) and their pairwise matrices C = [c(x_i, y_j)].
//!
//! Three cost kinds are supported:
//! - `SquaredEuclidean`: c(x, y) = ||x - y||^2.
//! - `NegLogDot`: c(x, y) = -log(x^T y), finite only for x^T y > 0 (points on
//!   the positive part of a sphere, for instance).
//! - `FromFeatures`: c(x, y) = -eps * log(phi(x)^T phi(y)) for a positive
//!   feature map phi. This kind has no pointwise formula at this layer; build
//!   the embeddings first and use [`cost_matrix_from_embeddings`] or
//!   [`cost_from_features`].

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::linalg::dot;
use crate::measure::DiscreteMeasure;
use crate::Result;

/// Which ground cost to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    SquaredEuclidean,
    NegLogDot,
    FromFeatures,
}

/// A ground cost together with the entropic regularization strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub epsilon: f64,
}

impl CostSpec {
    /// Builds a spec, rejecting non-positive `epsilon`.
    pub fn new(kind: CostKind, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(CoreError::NonPositiveEpsilon(epsilon));
        }
        Ok(Self { kind, epsilon })
    }

    /// Squared Euclidean cost with regularization `epsilon`.
    pub fn squared_euclidean(epsilon: f64) -> Result<Self> {
        Self::new(CostKind::SquaredEuclidean, epsilon)
    }

    /// Negative log inner product cost with regularization `epsilon`.
    pub fn neg_log_dot(epsilon: f64) -> Result<Self> {
        Self::new(CostKind::NegLogDot, epsilon)
    }

    /// Feature-defined cost with regularization `epsilon`.
    pub fn from_features(epsilon: f64) -> Result<Self> {
        Self::new(CostKind::FromFeatures, epsilon)
    }
}

/// Dense pairwise cost matrix C with C_ij = c(x_i, y_j).
///
/// # Errors
/// - [`CoreError::DimensionMismatch`] when the measures live in different
///   dimensions.
/// - [`CoreError::NonPositiveDot`] when `NegLogDot` meets a pair with
///   x^T y <= 0.
/// - [`CoreError::FeatureCostNeedsEmbeddings`] for the `FromFeatures` kind.
pub fn cost_matrix(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    spec: &CostSpec,
) -> Result<Array2<f64>> {
    if mu.dim() != nu.dim() {
        return Err(CoreError::DimensionMismatch {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    let (n, m) = (mu.len(), nu.len());
    let xs = mu.points();
    let ys = nu.points();
    let mut c = Array2::zeros((n, m));
    match spec.kind {
        CostKind::SquaredEuclidean => {
            for i in 0..n {
                let xi = xs.row(i);
                for j in 0..m {
                    c[[i, j]] = squared_distance(xi, ys.row(j));
                }
            }
        }
        CostKind::NegLogDot => {
            for i in 0..n {
                let xi = xs.row(i);
                for j in 0..m {
                    let value = dot(xi.as_slice().unwrap(), ys.row(j).as_slice().unwrap());
                    if value <= 0.0 {
                        return Err(CoreError::NonPositiveDot { i, j, value });
                    }
                    c[[i, j]] = -value.ln();
                }
            }
        }
        CostKind::FromFeatures => return Err(CoreError::FeatureCostNeedsEmbeddings),
    }
    Ok(c)
}

/// Cost of one point pair under a positive feature map,
/// -eps * log(phi_x^T phi_y).
///
/// # Errors
/// - [`CoreError::EmptyFeature`] for zero-length vectors.
/// - [`CoreError::LengthMismatch`] when the vectors differ in length.
/// - [`CoreError::NonPositiveFeatureDot`] when the dot product is not
///   strictly positive.
pub fn cost_from_features(
    phi_x: ArrayView1<'_, f64>,
    phi_y: ArrayView1<'_, f64>,
    epsilon: f64,
) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CoreError::NonPositiveEpsilon(epsilon));
    }
    if phi_x.is_empty() || phi_y.is_empty() {
        return Err(CoreError::EmptyFeature);
    }
    if phi_x.len() != phi_y.len() {
        return Err(CoreError::LengthMismatch {
            context: "feature vectors",
            expected: phi_x.len(),
            got: phi_y.len(),
        });
    }
    let value = dot(
        phi_x.as_slice().expect("feature vector is contiguous"),
        phi_y.as_slice().expect("feature vector is contiguous"),
    );
    if value <= 0.0 {
        return Err(CoreError::NonPositiveFeatureDot { value });
    }
    Ok(-epsilon * value.ln())
}

/// Dense pairwise cost matrix from per-point embeddings,
/// C_ij = -eps * log(row_i(xi)^T row_j(zeta)).
///
/// Rows index points; this materializes the n x m matrix, so it is intended
/// for diagnostics and tests rather than large instances.
pub fn cost_matrix_from_embeddings(
    xi: ArrayView2<'_, f64>,
    zeta: ArrayView2<'_, f64>,
    epsilon: f64,
) -> Result<Array2<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CoreError::NonPositiveEpsilon(epsilon));
    }
    if xi.ncols() != zeta.ncols() {
        return Err(CoreError::LengthMismatch {
            context: "embedding widths",
            expected: xi.ncols(),
            got: zeta.ncols(),
        });
    }
    if xi.ncols() == 0 {
        return Err(CoreError::EmptyFeature);
    }
    let mut c = Array2::zeros((xi.nrows(), zeta.nrows()));
    for i in 0..xi.nrows() {
        let row = xi.row(i);
        for j in 0..zeta.nrows() {
            let value = dot(row.as_slice().unwrap(), zeta.row(j).as_slice().unwrap());
            if value <= 0.0 {
                return Err(CoreError::NonPositiveFeatureDot { value });
            }
            c[[i, j]] = -epsilon * value.ln();
        }
    }
    Ok(c)
}

fn squared_distance(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    let mut s = 0.0;
    for (xi, yi) in x.iter().zip(y.iter()) {
        let diff = xi - yi;
        s += diff * diff;
    }
    s
}
