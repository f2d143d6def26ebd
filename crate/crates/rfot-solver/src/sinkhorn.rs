//! Matrix scaling iteration for entropic transport.
//!
//! Given a kernel K with positive entries and weight vectors a, b, the
//! iteration alternates
//!
//! ```text
//!   v <- b ./ (K^T u),    u <- a ./ (K v)
//! ```
//!
//! starting from u = 1. At a fixed point, diag(u) K diag(v) has row sums
//! a and column sums b, and the value estimate
//!
//! ```text
//!   W = eps * (a . log u + b . log v)
//! ```
//!
//! equals the dual objective of the regularized problem. The update for
//! u makes the row marginal exact by construction, so convergence is
//! measured on the column marginal alone:
//!
//! ```text
//!   residual = || v .* (K^T u) - b ||_1
//! ```
//!
//! Scaling vectors grow like exp(potential / eps) and can leave the f64
//! range for small eps. Whenever the largest entry of u or v crosses the
//! configured threshold (in either direction), the vector is divided by
//! that entry and its logarithm is accumulated into a scalar offset; the
//! sums log u + offset_u and log v + offset_v are invariant under this
//! rescaling, so the iteration is unchanged in exact arithmetic.

use ndarray::Array1;
use rfot_core::linalg;
use rfot_core::{DualPotentials, KernelOperator};
use std::time::Instant;

use crate::config::{SolveConfig, SolveReport};
use crate::error::SolverError;

/// Checks that the weight vectors match the kernel shape and that a
/// dense kernel has no exact zero entries.
pub(crate) fn validate_problem(
    kernel: &KernelOperator,
    a: &Array1<f64>,
    b: &Array1<f64>,
) -> Result<(), SolverError> {
    let (n, m) = kernel.shape();
    if a.len() != n {
        return Err(SolverError::MarginalLength {
            side: "row",
            expected: n,
            got: a.len(),
        });
    }
    if b.len() != m {
        return Err(SolverError::MarginalLength {
            side: "column",
            expected: m,
            got: b.len(),
        });
    }
    let zeros = kernel.zero_entries();
    if zeros > 0 {
        return Err(SolverError::ZeroKernelEntries { count: zeros });
    }
    Ok(())
}

/// Divides `x` by its largest entry if that entry left the band
/// `[1/threshold, threshold]`, returning the log moved into the offset.
fn stabilize(x: &mut Array1<f64>, threshold: f64) -> Option<f64> {
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max > threshold || max < 1.0 / threshold {
        x.mapv_inplace(|t| t / max);
        Some(max.ln())
    } else {
        None
    }
}

/// One scaling division with breakdown detection: `out = num ./ den`.
fn scale_divide(
    num: &Array1<f64>,
    den: &Array1<f64>,
    iter: usize,
    what: &'static str,
) -> Result<Array1<f64>, SolverError> {
    let mut out = Array1::zeros(num.len());
    for ((o, &p), &q) in out.iter_mut().zip(num.iter()).zip(den.iter()) {
        if !(q.is_finite() && q > 0.0) {
            return Err(SolverError::NumericalBreakdown { iter, what });
        }
        *o = p / q;
        if !o.is_finite() {
            return Err(SolverError::NumericalBreakdown { iter, what });
        }
    }
    Ok(out)
}

/// L1 distance between the column marginal of the current scaling pair
/// and the target weights. `kt_u` must hold K^T u for the current u and
/// `log_gauge` the sum of both offsets.
fn column_residual(v: &Array1<f64>, kt_u: &Array1<f64>, log_gauge: f64, b: &Array1<f64>) -> f64 {
    let gauge = log_gauge.exp();
    let mut terms = Vec::with_capacity(b.len());
    for ((&vj, &tj), &bj) in v.iter().zip(kt_u.iter()).zip(b.iter()) {
        terms.push(vj * tj * gauge - bj);
    }
    linalg::pairwise_abs_sum(&terms)
}

/// Dual objective value for a scaling pair, offsets included:
/// `eps * (a . (log u + offset_u) + b . (log v + offset_v))`.
///
/// Both weight vectors sum to one, so the offsets contribute
/// `eps * (offset_u + offset_v)` exactly.
pub fn evaluate_dual(
    potentials: &DualPotentials,
    a: &Array1<f64>,
    b: &Array1<f64>,
    epsilon: f64,
) -> f64 {
    let log_u: Vec<f64> = potentials.u.iter().map(|&x| x.ln()).collect();
    let log_v: Vec<f64> = potentials.v.iter().map(|&x| x.ln()).collect();
    let a_term = linalg::dot(a.as_slice().expect("contiguous"), &log_u);
    let b_term = linalg::dot(b.as_slice().expect("contiguous"), &log_v);
    epsilon * (a_term + b_term + potentials.log_offset_u + potentials.log_offset_v)
}

struct BestIterate {
    potentials: DualPotentials,
    residual: f64,
    iters: usize,
}

impl BestIterate {
    fn consider(
        best: &mut Option<BestIterate>,
        u: &Array1<f64>,
        v: &Array1<f64>,
        off_u: f64,
        off_v: f64,
        residual: f64,
        iters: usize,
    ) {
        if best.as_ref().map_or(true, |b| residual < b.residual) {
            *best = Some(BestIterate {
                potentials: DualPotentials {
                    u: u.clone(),
                    v: v.clone(),
                    log_offset_u: off_u,
                    log_offset_v: off_v,
                },
                residual,
                iters,
            });
        }
    }
}

/// Runs the scaling iteration on `kernel` with row weights `a` and
/// column weights `b` at regularization `epsilon`.
///
/// Returns the converged iterate, or the iterate with the smallest
/// residual seen when the iteration cap is reached (`converged` is
/// false in that case). Errors only on invalid inputs or numerical
/// breakdown.
pub fn sinkhorn(
    kernel: &KernelOperator,
    a: &Array1<f64>,
    b: &Array1<f64>,
    epsilon: f64,
    config: &SolveConfig,
) -> Result<SolveReport, SolverError> {
    config.validate()?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(SolverError::Core(rfot_core::CoreError::NonPositiveEpsilon(
            epsilon,
        )));
    }
    validate_problem(kernel, a, b)?;
    let start = Instant::now();
    let (n, m) = kernel.shape();

    let mut u = Array1::<f64>::ones(n);
    let mut v = Array1::<f64>::ones(m);
    let mut off_u = 0.0f64;
    let mut off_v = 0.0f64;
    let mut stabilizations = 0usize;

    let mut best: Option<BestIterate> = None;
    let mut converged = false;
    let mut iters_done = 0usize;

    for iter in 1..=config.max_iters {
        let kt_u = kernel.rmatvec(u.view())?;

        // kt_u pairs the current u with the v of the completed previous
        // iteration, which is exactly the convergence quantity; checking
        // here costs no extra products.
        if iter > 1 && (iter - 1) % config.check_every == 0 {
            let residual = column_residual(&v, &kt_u, off_u + off_v, b);
            BestIterate::consider(&mut best, &u, &v, off_u, off_v, residual, iter - 1);
            if residual < config.marginal_tol {
                converged = true;
                iters_done = iter - 1;
                break;
            }
        }

        v = scale_divide(b, &kt_u, iter, "column scaling")?;
        off_v = -off_u;
        if let Some(ln) = stabilize(&mut v, config.stabilization_threshold) {
            off_v += ln;
            stabilizations += 1;
        }

        let kv = kernel.matvec(v.view())?;
        u = scale_divide(a, &kv, iter, "row scaling")?;
        off_u = -off_v;
        if let Some(ln) = stabilize(&mut u, config.stabilization_threshold) {
            off_u += ln;
            stabilizations += 1;
        }

        iters_done = iter;
    }

    if !converged {
        let kt_u = kernel.rmatvec(u.view())?;
        let residual = column_residual(&v, &kt_u, off_u + off_v, b);
        BestIterate::consider(&mut best, &u, &v, off_u, off_v, residual, iters_done);
        converged = residual < config.marginal_tol;
    }

    let best = best.expect("at least one residual was recorded");
    let w_hat = evaluate_dual(&best.potentials, a, b, epsilon);
    Ok(SolveReport {
        potentials: best.potentials,
        w_hat,
        iters: best.iters,
        marginal_residual: best.residual,
        wall_time: start.elapsed().as_secs_f64(),
        stabilizations,
        converged,
    })
}
