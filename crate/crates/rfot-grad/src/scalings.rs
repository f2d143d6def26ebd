//! Shared preparation of converged potentials for gradient contractions.
//!
//! Every gradient formula consumes the potentials only through the products
//!
//! ```text
//!     u~_i v~_j = u_i v_j exp(log_offset_u + log_offset_v),
//! ```
//!
//! which are invariant under the gauge freedom (t u, v / t). Folding the
//! whole offset into one side can overflow f64 even when the products are
//! tame, so the offset sum is split evenly between the two vectors before
//! any contraction runs.

use ndarray::Array1;
use rfot_core::linalg;
use rfot_core::{DualPotentials, KernelOperator};

use crate::error::GradError;
use crate::POTENTIAL_RESIDUAL_GATE;

/// Scaling vectors with the combined log offset split evenly between them,
/// so that elementwise products reproduce the true scalings' products.
pub(crate) fn split_gauge(potentials: &DualPotentials) -> (Array1<f64>, Array1<f64>) {
    let half = 0.5 * (potentials.log_offset_u + potentials.log_offset_v);
    let gauge = half.exp();
    let u = potentials.u.mapv(|ui| ui * gauge);
    let v = potentials.v.mapv(|vj| vj * gauge);
    (u, v)
}

/// Validates shapes, recomputes both marginal residuals from scratch, and
/// returns the gauge-split scalings once the potentials pass the gate.
///
/// The residual is recomputed rather than trusted from a solve report so
/// that gradients stay correct even for potentials that were loaded from
/// disk or massaged by the caller.
///
/// # Errors
/// - [`GradError::LengthMismatch`] on shape disagreement.
/// - [`GradError::NonFinite`] when the scalings or the recomputed marginals
///   leave the finite range.
/// - [`GradError::UnconvergedPotentials`] when either marginal residual
///   exceeds [`POTENTIAL_RESIDUAL_GATE`].
pub(crate) fn gated_scalings(
    kernel: &KernelOperator,
    a: ndarray::ArrayView1<'_, f64>,
    b: ndarray::ArrayView1<'_, f64>,
    potentials: &DualPotentials,
) -> Result<(Array1<f64>, Array1<f64>), GradError> {
    let (n, m) = kernel.shape();
    check_len("source weights", n, a.len())?;
    check_len("target weights", m, b.len())?;
    check_len("u scaling", n, potentials.u.len())?;
    check_len("v scaling", m, potentials.v.len())?;

    let (u, v) = split_gauge(potentials);
    if !u.iter().all(|x| x.is_finite()) || !v.iter().all(|x| x.is_finite()) {
        return Err(GradError::NonFinite {
            what: "gauge-split scalings",
        });
    }

    let kv = kernel.matvec(v.view())?;
    let ktu = kernel.rmatvec(u.view())?;
    let row_gap: Vec<f64> = u
        .iter()
        .zip(kv.iter())
        .zip(a.iter())
        .map(|((&ui, &kvi), &ai)| ui * kvi - ai)
        .collect();
    let col_gap: Vec<f64> = v
        .iter()
        .zip(ktu.iter())
        .zip(b.iter())
        .map(|((&vj, &tj), &bj)| vj * tj - bj)
        .collect();
    let residual = linalg::pairwise_abs_sum(&row_gap).max(linalg::pairwise_abs_sum(&col_gap));
    if !residual.is_finite() {
        return Err(GradError::NonFinite {
            what: "recomputed marginal residual",
        });
    }
    if residual > POTENTIAL_RESIDUAL_GATE {
        return Err(GradError::UnconvergedPotentials {
            residual,
            required: POTENTIAL_RESIDUAL_GATE,
        });
    }
    Ok((u, v))
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), GradError> {
    if expected == got {
        Ok(())
    } else {
        Err(GradError::LengthMismatch {
            what,
            expected,
            got,
        })
    }
}
