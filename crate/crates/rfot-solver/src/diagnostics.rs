//! Sanity checks on solver output.

use ndarray::Array1;
use rfot_core::{DualPotentials, KernelOperator};

/// Slack factor on the potential range bound to absorb rounding in the
/// logs; the bound itself is scale-free so the slack is relative.
const RANGE_SLACK: f64 = 1e-9;

/// Extremes of a scaling problem used by [`potential_range_check`].
#[derive(Debug, Clone, Copy)]
pub struct KernelStats {
    /// Lower bound on the smallest kernel entry.
    pub min_entry: f64,
    /// Upper bound on the largest kernel entry.
    pub max_entry: f64,
    /// Smallest weight across both marginals.
    pub min_weight: f64,
}

impl KernelStats {
    /// Collects the extremes from a kernel operator and the two weight
    /// vectors. Factorized kernels report conservative entry bounds, so
    /// the resulting range bound can only widen.
    pub fn from_problem(kernel: &KernelOperator, a: &Array1<f64>, b: &Array1<f64>) -> Self {
        let (min_entry, max_entry) = kernel.entry_bounds();
        let min_weight = a
            .iter()
            .chain(b.iter())
            .cloned()
            .fold(f64::INFINITY, f64::min);
        KernelStats {
            min_entry,
            max_entry,
            min_weight,
        }
    }
}

/// Outcome of comparing potential oscillations against their a priori
/// bound.
#[derive(Debug, Clone, Copy)]
pub struct RangeDiagnostic {
    /// max - min of the row potential eps * (log u + offset).
    pub alpha_range: f64,
    /// max - min of the column potential eps * (log v + offset).
    pub beta_range: f64,
    /// The bound eps * R with R = -ln(min_weight * min_entry / max_entry).
    pub bound: f64,
    pub within_bound: bool,
}

/// Checks the fixed-point bound on potential oscillation: at a scaling
/// fixed point, both potentials vary by at most
///
/// ```text
///   eps * R(K),    R(K) = -ln( min_weight * K_min / K_max )
/// ```
///
/// A violation on converged output indicates corrupted potentials or a
/// kernel whose claimed entry bounds are wrong. When the kernel's lower
/// entry bound is zero the bound is infinite and the check is vacuous.
pub fn potential_range_check(
    potentials: &DualPotentials,
    epsilon: f64,
    stats: &KernelStats,
) -> RangeDiagnostic {
    let range_of = |x: &Array1<f64>| -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in x.iter() {
            let l = t.ln();
            lo = lo.min(l);
            hi = hi.max(l);
        }
        // A uniform offset shifts both ends equally and cancels here.
        epsilon * (hi - lo)
    };
    let alpha_range = range_of(&potentials.u);
    let beta_range = range_of(&potentials.v);
    let r = -(stats.min_weight * stats.min_entry / stats.max_entry).ln();
    let bound = epsilon * r;
    let limit = bound * (1.0 + RANGE_SLACK);
    RangeDiagnostic {
        alpha_range,
        beta_range,
        bound,
        within_bound: alpha_range <= limit && beta_range <= limit,
    }
}
