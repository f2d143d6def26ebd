//! Gradient report container.

use ndarray::Array2;

use crate::error::GradError;

/// A computed gradient, shaped like the differentiated object, plus the
/// outcome of a finite-difference check when one was run.
#[derive(Debug, Clone)]
pub struct GradReport {
    /// Gradient entries; rows follow the differentiated object's own row
    /// layout (kernel entries, point rows, or parameter rows).
    pub grad: Array2<f64>,
    /// Largest finite-difference discrepancy, measured relative to the
    /// largest difference-quotient magnitude. `None` when no check ran.
    pub fd_max_rel_err: Option<f64>,
}

impl GradReport {
    /// Wraps a gradient after checking that every entry is finite.
    ///
    /// # Errors
    /// [`GradError::NonFinite`] when any entry is NaN or infinite.
    pub fn new(grad: Array2<f64>, fd_max_rel_err: Option<f64>) -> Result<Self, GradError> {
        if !grad.iter().all(|g| g.is_finite()) {
            return Err(GradError::NonFinite {
                what: "gradient entries",
            });
        }
        Ok(Self {
            grad,
            fd_max_rel_err,
        })
    }

    /// Largest absolute gradient entry, 0 for an empty gradient.
    pub fn max_abs(&self) -> f64 {
        self.grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()))
    }

    /// JSON value with the gradient as nested row arrays.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self
            .grad
            .rows()
            .into_iter()
            .map(|row| row.to_vec())
            .collect();
        serde_json::json!({
            "shape": [self.grad.nrows(), self.grad.ncols()],
            "grad": rows,
            "fd_max_rel_err": self.fd_max_rel_err,
        })
    }
}

/// Location gradients for both sides of a transport problem. The first
/// block differentiates with respect to the source support, the second
/// with respect to the target support; both are needed to contract the
/// gradient against motions that move the two point clouds together.
#[derive(Debug, Clone)]
pub struct LocationGradients {
    /// Gradient over the source points, shaped like the source point array.
    pub wrt_x: GradReport,
    /// Gradient over the target points, shaped like the target point array.
    pub wrt_y: GradReport,
}

impl LocationGradients {
    /// JSON value with one entry per side.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "wrt_x": self.wrt_x.to_json(),
            "wrt_y": self.wrt_y.to_json(),
        })
    }
}
