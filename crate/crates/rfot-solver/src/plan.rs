//! Transport plan materialization.

use ndarray::Array2;
use rfot_core::{DualPotentials, KernelOperator};

use crate::error::SolverError;

/// Materializes the transport plan `diag(u) K diag(v)` scaled by the
/// accumulated gauge `exp(offset_u + offset_v)`.
///
/// A factorized kernel must first be expanded entry by entry, which
/// costs rows * columns memory; `cap` bounds how many entries the
/// caller is willing to allocate. Dense kernels already hold their
/// entries, so the cap applies to them as well for symmetry.
pub fn plan(
    kernel: &KernelOperator,
    potentials: &DualPotentials,
    cap: usize,
) -> Result<Array2<f64>, SolverError> {
    let (n, m) = kernel.shape();
    if n.checked_mul(m).map_or(true, |entries| entries > cap) {
        return Err(SolverError::PlanTooLarge {
            rows: n,
            cols: m,
            cap,
        });
    }
    if potentials.u.len() != n {
        return Err(SolverError::MarginalLength {
            side: "row",
            expected: n,
            got: potentials.u.len(),
        });
    }
    if potentials.v.len() != m {
        return Err(SolverError::MarginalLength {
            side: "column",
            expected: m,
            got: potentials.v.len(),
        });
    }
    let gauge = (potentials.log_offset_u + potentials.log_offset_v).exp();
    let mut out = kernel.materialize();
    for ((i, j), entry) in out.indexed_iter_mut() {
        *entry *= potentials.u[i] * potentials.v[j] * gauge;
    }
    Ok(out)
}
