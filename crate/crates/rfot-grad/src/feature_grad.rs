//! Gradient of the transport value with respect to the sampled feature
//! parameters.
//!
//! A feature row u_j touches the kernel through both embeddings at once:
//! K_il = (1/r) sum_j phi(x_i, u_j) phi(y_l, u_j). Contracting the kernel
//! gradient -eps u~ v~^T against dK/du_j and grouping by side gives
//!
//! ```text
//!     dW/du_j = -(eps / r) (gs_j t_j + s_j gt_j),
//!
//!     s_j  = sum_i u~_i phi(x_i, u_j),    gs_j = sum_i u~_i dphi(x_i, u_j)/du,
//!     t_j  = sum_l v~_l phi(y_l, u_j),    gt_j = sum_l v~_l dphi(y_l, u_j)/du.
//! ```
//!
//! Each side is swept once, accumulating the value and the parameter
//! derivative together, so the cost is O(r d (n + m)) with no n x m
//! intermediate.

use ndarray::{Array1, Array2};
use rfot_core::{DiscreteMeasure, DualPotentials, KernelOperator};
use rfot_features::gaussian::GaussianEval;
use rfot_features::SampledFeatures;

use crate::error::GradError;
use crate::location_grad::jacobian_eval;
use crate::report::GradReport;
use crate::scalings::gated_scalings;

/// Gradient of the converged factorized transport value with respect to
/// every sampled parameter row, shaped like the theta array (r x d).
///
/// # Errors
/// - [`GradError::JacobianUnavailable`] for maps without analytic
///   parameter derivatives (only the Gaussian map ships them).
/// - [`GradError::UnconvergedPotentials`] when the recomputed marginal
///   residual exceeds the gate.
/// - Embedding errors for points outside the feature domain.
pub fn grad_wrt_features(
    features: &SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    potentials: &DualPotentials,
) -> Result<GradReport, GradError> {
    let eval = jacobian_eval(features)?;
    let xi = features.embed(mu)?;
    let zeta = features.embed(nu)?;
    let kernel = KernelOperator::factorized(xi, zeta)?;
    let (ut, vt) = gated_scalings(&kernel, mu.weights(), nu.weights(), potentials)?;

    let epsilon = features.spec().epsilon();
    let r = features.r();
    let d = features.spec().dim();

    let (s, gs) = side_sums(&eval, features, mu, &ut);
    let (t, gt) = side_sums(&eval, features, nu, &vt);

    let coeff = -epsilon / r as f64;
    let mut grad = Array2::zeros((r, d));
    for j in 0..r {
        for c in 0..d {
            grad[[j, c]] = coeff * (gs[[j, c]] * t[j] + s[j] * gt[[j, c]]);
        }
    }
    GradReport::new(grad, None)
}

/// Weighted sums of raw feature values and their parameter derivatives over
/// one side's points: returns (sum_k w_k phi(p_k, u_j), sum_k w_k
/// dphi(p_k, u_j)/du) for every feature row j.
fn side_sums(
    eval: &GaussianEval,
    features: &SampledFeatures,
    side: &DiscreteMeasure,
    scalings: &Array1<f64>,
) -> (Array1<f64>, Array2<f64>) {
    let r = features.r();
    let d = features.spec().dim();
    let theta = features.theta();
    let theta = theta.as_slice().expect("theta is contiguous");
    let mut values = Array1::zeros(r);
    let mut derivs = Array2::zeros((r, d));
    let mut dphi = vec![0.0f64; d];
    for (k, point) in side.points().rows().into_iter().enumerate() {
        let p = point.as_slice().expect("point rows are contiguous");
        let w = scalings[k];
        for (j, u) in theta.chunks_exact(d).enumerate() {
            let phi = eval.eval_with_du(p, u, &mut dphi);
            values[j] += w * phi;
            for (c, &dc) in dphi.iter().enumerate() {
                derivs[[j, c]] += w * dc;
            }
        }
    }
    (values, derivs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rfot_features::{sample_features, FeatureMapSpec};
    use rfot_solver::{sinkhorn, SolveConfig};

    fn tight() -> SolveConfig {
        SolveConfig {
            marginal_tol: 1e-13,
            check_every: 1,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn single_feature_single_point_matches_symbolic_derivative() {
        let epsilon = 0.8;
        let spec = FeatureMapSpec::gaussian(epsilon, 1.0, 2).unwrap();
        let q = spec.gaussian_bandwidth().unwrap().q;
        let theta = array![[0.15, -0.3]];
        let features = SampledFeatures::from_theta(&spec, theta, 0).unwrap();
        let mu = DiscreteMeasure::uniform(array![[0.4, 0.1]]).unwrap();
        let nu = DiscreteMeasure::uniform(array![[-0.2, 0.5]]).unwrap();

        let xi = features.embed(&mu).unwrap();
        let zeta = features.embed(&nu).unwrap();
        let kernel = KernelOperator::factorized(xi, zeta).unwrap();
        let report = sinkhorn(&kernel, &mu.weights().to_owned(), &nu.weights().to_owned(), epsilon, &tight()).unwrap();
        let grad = grad_wrt_features(&features, &mu, &nu, &report.potentials).unwrap();

        // W = -eps log(phi(x, u) phi(y, u)), so
        // dW/du = -(4(x - u) + 4(y - u) + 4u/q) componentwise.
        let (x, y, u) = ([0.4, 0.1], [-0.2, 0.5], [0.15, -0.3]);
        for c in 0..2 {
            let expected = -(4.0 * (x[c] - u[c]) + 4.0 * (y[c] - u[c]) + 4.0 * u[c] / q);
            let got = grad.grad[[0, c]];
            assert!(
                (got - expected).abs() <= 1e-10 * expected.abs().max(1.0),
                "component {c}: got {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn gauge_shift_leaves_gradient_unchanged() {
        let spec = FeatureMapSpec::gaussian(0.6, 1.0, 2).unwrap();
        let features = sample_features(&spec, 24, 11).unwrap();
        let mu = DiscreteMeasure::new(
            array![[0.2, 0.1], [-0.3, 0.4], [0.5, -0.2]],
            array![0.5, 0.3, 0.2],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(array![[-0.1, -0.4], [0.4, 0.3]], array![0.6, 0.4]).unwrap();

        let xi = features.embed(&mu).unwrap();
        let zeta = features.embed(&nu).unwrap();
        let kernel = KernelOperator::factorized(xi, zeta).unwrap();
        let report = sinkhorn(&kernel, &mu.weights().to_owned(), &nu.weights().to_owned(), 0.6, &tight()).unwrap();
        let base = grad_wrt_features(&features, &mu, &nu, &report.potentials).unwrap();

        let mut shifted = report.potentials.clone();
        shifted.rescale_u(8.2e45);
        shifted.rescale_v(1.0 / 8.2e45);
        let moved = grad_wrt_features(&features, &mu, &nu, &shifted).unwrap();

        let scale = base.max_abs();
        for (g0, g1) in base.grad.iter().zip(moved.grad.iter()) {
            assert!((g0 - g1).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn custom_map_has_no_jacobian() {
        let spec = FeatureMapSpec::custom(0.8, 1.0, 2).unwrap();
        let theta = array![[0.1, 0.2]];
        let features = SampledFeatures::from_theta(&spec, theta, 0).unwrap();
        let mu = DiscreteMeasure::uniform(array![[0.1, 0.2]]).unwrap();
        let pots = DualPotentials::ones(1, 1);
        let err = grad_wrt_features(&features, &mu, &mu, &pots).unwrap_err();
        assert!(matches!(
            err,
            GradError::JacobianUnavailable { map: "custom" }
        ));
    }
}
