//! Gradients of the transport value with respect to support point
//! locations.
//!
//! Two differentiation routes are provided. The feature route moves a point
//! through its embedding row: with K = Xi Zeta^T,
//!
//! ```text
//!     dW/dx_k = -eps u~_k J_k^T (Zeta^T v~),    J_k = d xi_k / d x_k,
//! ```
//!
//! and symmetrically for target points through Zeta. The contraction first
//! reduces the far side to an r-vector and then sweeps each point's
//! analytic jacobian against it, so the cost is O(r d (n + m)) and no
//! n x m object is ever formed.
//!
//! The squared-distance route differentiates the classical cost
//! c(x, y) = ||x - y||^2 through the transport plan instead:
//!
//! ```text
//!     dW/dx_k = 2 sum_j P_kj (x_k - y_j),    P = diag(u~) K diag(v~),
//! ```
//!
//! evaluated with d extra kernel products per side. Summing this gradient
//! over all points of both clouds telescopes to zero, which is the
//! fingerprint of a translation-invariant cost.

use ndarray::{Array1, Array2};
use rfot_core::{DiscreteMeasure, DualPotentials, KernelOperator};
use rfot_features::gaussian::GaussianEval;
use rfot_features::{FeatureKind, SampledFeatures};
use rfot_solver::{sinkhorn, SolveConfig};

use crate::error::GradError;
use crate::report::{GradReport, LocationGradients};
use crate::scalings::gated_scalings;

/// Resolves the analytic point-jacobian evaluator for a feature map, or
/// reports which map lacks one.
pub(crate) fn jacobian_eval(features: &SampledFeatures) -> Result<GaussianEval, GradError> {
    match features.spec().kind() {
        FeatureKind::Gaussian => Ok(GaussianEval::new(features.spec())?),
        FeatureKind::ArccosPerturbed { .. } => Err(GradError::JacobianUnavailable {
            map: "arccos-perturbed",
        }),
        FeatureKind::Custom => Err(GradError::JacobianUnavailable { map: "custom" }),
    }
}

/// Gradients of the converged factorized transport value with respect to
/// every support point of both measures, each side shaped like its point
/// array (rows are points).
///
/// # Errors
/// - [`GradError::JacobianUnavailable`] for maps without analytic point
///   derivatives (only the Gaussian map ships them).
/// - [`GradError::UnconvergedPotentials`] when the recomputed marginal
///   residual exceeds the gate.
/// - Embedding errors for points outside the feature domain.
pub fn grad_wrt_locations(
    features: &SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    potentials: &DualPotentials,
) -> Result<LocationGradients, GradError> {
    let eval = jacobian_eval(features)?;
    let xi = features.embed(mu)?;
    let zeta = features.embed(nu)?;
    let kernel = KernelOperator::factorized(xi, zeta)?;
    let (ut, vt) = gated_scalings(&kernel, mu.weights(), nu.weights(), potentials)?;

    let epsilon = features.spec().epsilon();
    let r = features.r();
    let scale = 1.0 / (r as f64).sqrt();
    let (xi, zeta) = match kernel.variant() {
        rfot_core::kernel::KernelVariant::Factorized { xi, zeta } => (xi, zeta),
        rfot_core::kernel::KernelVariant::Dense { .. } => unreachable!("built factorized"),
    };

    // Far-side reductions: t_j = sum_l v~_l zeta_lj, s_j = sum_i u~_i xi_ij.
    let mut t = vec![0.0f64; r];
    for (l, row) in zeta.rows().into_iter().enumerate() {
        let row = row.as_slice().expect("embedding rows are contiguous");
        for (tj, &zj) in t.iter_mut().zip(row.iter()) {
            *tj += vt[l] * zj;
        }
    }
    let mut s = vec![0.0f64; r];
    for (i, row) in xi.rows().into_iter().enumerate() {
        let row = row.as_slice().expect("embedding rows are contiguous");
        for (sj, &xj) in s.iter_mut().zip(row.iter()) {
            *sj += ut[i] * xj;
        }
    }

    let wrt_x = side_gradient(&eval, features, mu, &ut, &t, -epsilon * scale)?;
    let wrt_y = side_gradient(&eval, features, nu, &vt, &s, -epsilon * scale)?;
    Ok(LocationGradients {
        wrt_x: GradReport::new(wrt_x, None)?,
        wrt_y: GradReport::new(wrt_y, None)?,
    })
}

/// Sweeps one side's points against the far-side reduction: row k of the
/// result is `coeff * w_k * sum_j far_j dphi(p_k, u_j)/dp`.
fn side_gradient(
    eval: &GaussianEval,
    features: &SampledFeatures,
    side: &DiscreteMeasure,
    scalings: &Array1<f64>,
    far: &[f64],
    coeff: f64,
) -> Result<Array2<f64>, GradError> {
    let d = features.spec().dim();
    let theta = features.theta();
    let theta = theta.as_slice().expect("theta is contiguous");
    let mut grad = Array2::zeros((side.len(), d));
    let mut dphi = vec![0.0f64; d];
    let mut acc = vec![0.0f64; d];
    for (k, point) in side.points().rows().into_iter().enumerate() {
        let p = point.as_slice().expect("point rows are contiguous");
        acc.iter_mut().for_each(|c| *c = 0.0);
        for (u, &fj) in theta.chunks_exact(d).zip(far.iter()) {
            eval.eval_with_dx(p, u, &mut dphi);
            for (ac, &dc) in acc.iter_mut().zip(dphi.iter()) {
                *ac += fj * dc;
            }
        }
        let w = coeff * scalings[k];
        for (c, &ac) in acc.iter().enumerate() {
            grad[[k, c]] = w * ac;
        }
    }
    Ok(grad)
}

/// Gradients of the converged transport value under the squared Euclidean
/// cost, computed from the plan without materializing it. Works for dense
/// and factorized kernels alike since only kernel products are needed.
///
/// # Errors
/// - [`GradError::LengthMismatch`] when measure sizes disagree with the
///   kernel shape or the two dimensions differ.
/// - [`GradError::UnconvergedPotentials`] when the recomputed marginal
///   residual exceeds the gate.
pub fn grad_wrt_locations_squared_euclidean(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    kernel: &KernelOperator,
    potentials: &DualPotentials,
) -> Result<LocationGradients, GradError> {
    if mu.dim() != nu.dim() {
        return Err(GradError::LengthMismatch {
            what: "point dimension",
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let (ut, vt) = gated_scalings(kernel, mu.weights(), nu.weights(), potentials)?;
    let d = mu.dim();
    let x = mu.points();
    let y = nu.points();

    let kv = kernel.matvec(vt.view())?;
    let ktu = kernel.rmatvec(ut.view())?;
    let mut wrt_x = Array2::zeros((mu.len(), d));
    let mut wrt_y = Array2::zeros((nu.len(), d));
    for c in 0..d {
        let vy = Array1::from_shape_fn(nu.len(), |j| vt[j] * y[[j, c]]);
        let kvy = kernel.matvec(vy.view())?;
        let ux = Array1::from_shape_fn(mu.len(), |i| ut[i] * x[[i, c]]);
        let ktux = kernel.rmatvec(ux.view())?;
        for k in 0..mu.len() {
            wrt_x[[k, c]] = 2.0 * ut[k] * (x[[k, c]] * kv[k] - kvy[k]);
        }
        for l in 0..nu.len() {
            wrt_y[[l, c]] = 2.0 * vt[l] * (y[[l, c]] * ktu[l] - ktux[l]);
        }
    }
    Ok(LocationGradients {
        wrt_x: GradReport::new(wrt_x, None)?,
        wrt_y: GradReport::new(wrt_y, None)?,
    })
}

/// Gradient of the debiased divergence with respect to the source support:
/// the cross term's source gradient minus half of both gradients of the
/// source self term (whose two slots share the same points). The target
/// self term does not involve the source points at all.
///
/// Solves all three legs internally with the shared feature set.
///
/// # Errors
/// - [`GradError::ProbeUnconverged`] when a leg fails to reach the solver
///   tolerance.
/// - Everything [`grad_wrt_locations`] can report.
pub fn divergence_location_grad(
    features: &SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<GradReport, GradError> {
    let cross = solve_and_grad(features, mu, nu, config)?;
    let self_mu = solve_and_grad(features, mu, mu, config)?;
    let grad = cross.wrt_x.grad
        - 0.5 * (&self_mu.wrt_x.grad + &self_mu.wrt_y.grad);
    GradReport::new(grad, None)
}

fn solve_and_grad(
    features: &SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<LocationGradients, GradError> {
    let xi = features.embed(mu)?;
    let zeta = features.embed(nu)?;
    let kernel = KernelOperator::factorized(xi, zeta)?;
    let a = mu.weights().to_owned();
    let b = nu.weights().to_owned();
    let report = sinkhorn(&kernel, &a, &b, features.spec().epsilon(), config)?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    grad_wrt_locations(features, mu, nu, &report.potentials)
}
