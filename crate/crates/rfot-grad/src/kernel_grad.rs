//! Gradient of the regularized transport value with respect to the kernel
//! matrix.
//!
//! Viewing the converged value as a function G of the kernel alone, the
//! dual solution acts as an envelope: the optimal potentials may be held
//! fixed while the kernel moves, which collapses the derivative to
//!
//! ```text
//!     dG/dK_ij = -eps u~_i v~_j,
//! ```
//!
//! the negatively scaled outer product of the true scaling vectors. No
//! entries of the kernel itself appear; the matrix only fixes the shape and
//! the marginal-residual gate. Since every factor is positive, the gradient
//! is entrywise nonpositive: raising any kernel entry can only lower the
//! value.

use ndarray::{Array2, ArrayView1};
use rfot_core::{DualPotentials, KernelOperator};

use crate::error::GradError;
use crate::report::GradReport;
use crate::scalings::gated_scalings;

/// Gradient of the converged transport value with respect to every entry
/// of a dense kernel matrix, as an n x m array.
///
/// Entries are computed as `-eps * exp(log u~_i + log v~_j)` so that huge
/// offsets on one side cannot overflow an intermediate even though the
/// final products are plan-sized.
///
/// # Errors
/// - [`GradError::DenseKernelRequired`] for factorized operators, which
///   differentiate through their features or locations instead.
/// - [`GradError::UnconvergedPotentials`] when the recomputed marginal
///   residual exceeds the gate.
/// - [`GradError::LengthMismatch`] on shape disagreement.
pub fn grad_wrt_kernel(
    kernel: &KernelOperator,
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    epsilon: f64,
    potentials: &DualPotentials,
) -> Result<GradReport, GradError> {
    if kernel.embedding_width().is_some() {
        return Err(GradError::DenseKernelRequired);
    }
    gated_scalings(kernel, a, b, potentials)?;

    let (n, m) = kernel.shape();
    let gauge = potentials.log_offset_u + potentials.log_offset_v;
    let log_u: Vec<f64> = potentials.u.iter().map(|&ui| ui.ln()).collect();
    let log_v: Vec<f64> = potentials.v.iter().map(|&vj| vj.ln()).collect();
    let grad = Array2::from_shape_fn((n, m), |(i, j)| {
        -epsilon * (log_u[i] + log_v[j] + gauge).exp()
    });
    GradReport::new(grad, None)
}
