//! Central-difference verification of the analytic gradients.
//!
//! Every harness re-solves the transport problem from scratch at each
//! probe point and forms the symmetric quotient
//!
//! ```text
//!     (W(theta + h e) - W(theta - h e)) / (2 h),    h = 1e-6 max(1, |coord|),
//! ```
//!
//! so the checks exercise the full pipeline rather than any cached state.
//! Discrepancies are reported relative to the largest difference-quotient
//! magnitude of the object under test; a per-entry denominator would let
//! quotient noise on near-zero entries dominate the verdict.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rfot_core::{linalg, DiscreteMeasure, KernelOperator};
use rfot_solver::{sinkhorn, SolveConfig};

use crate::error::GradError;
use crate::feature_grad::grad_wrt_features;
use crate::kernel_grad::grad_wrt_kernel;
use crate::location_grad::grad_wrt_locations;
use crate::report::{GradReport, LocationGradients};

/// Central-difference step for one coordinate.
pub fn fd_step(coordinate: f64) -> f64 {
    1e-6 * coordinate.abs().max(1.0)
}

/// Largest entry discrepancy between an analytic gradient and its
/// difference quotients, relative to the largest quotient magnitude.
pub fn max_rel_disagreement(analytic: ArrayView2<'_, f64>, fd: ArrayView2<'_, f64>) -> f64 {
    let scale = fd
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-12);
    analytic
        .iter()
        .zip(fd.iter())
        .fold(0.0f64, |acc, (a, f)| acc.max((a - f).abs() / scale))
}

/// Solves and returns the converged value, refusing unconverged probes.
fn converged_value(
    kernel: &KernelOperator,
    a: &Array1<f64>,
    b: &Array1<f64>,
    epsilon: f64,
    config: &SolveConfig,
) -> Result<f64, GradError> {
    let report = sinkhorn(kernel, a, b, epsilon, config)?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    Ok(report.w_hat)
}

/// Difference quotients of the converged value over every entry of a dense
/// kernel matrix. Entries must stay positive under the probe steps, so the
/// smallest entry should exceed about 2e-6.
///
/// # Errors
/// Solver failures and unconverged probes.
pub fn fd_kernel_quotients(
    matrix: ArrayView2<'_, f64>,
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    epsilon: f64,
    config: &SolveConfig,
) -> Result<Array2<f64>, GradError> {
    let a = a.to_owned();
    let b = b.to_owned();
    let (n, m) = matrix.dim();
    let mut fd = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let h = fd_step(matrix[[i, j]]);
            let mut plus = matrix.to_owned();
            plus[[i, j]] += h;
            let mut minus = matrix.to_owned();
            minus[[i, j]] -= h;
            let wp = converged_value(&KernelOperator::dense(plus)?, &a, &b, epsilon, config)?;
            let wm = converged_value(&KernelOperator::dense(minus)?, &a, &b, epsilon, config)?;
            fd[[i, j]] = (wp - wm) / (2.0 * h);
        }
    }
    Ok(fd)
}

/// Checks the kernel gradient of a dense problem entry by entry.
///
/// Returns the analytic gradient with `fd_max_rel_err` populated.
///
/// # Errors
/// Solver failures, unconverged probes, and everything
/// [`grad_wrt_kernel`] can report.
pub fn fd_check_kernel(
    matrix: ArrayView2<'_, f64>,
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    epsilon: f64,
    config: &SolveConfig,
) -> Result<GradReport, GradError> {
    let kernel = KernelOperator::dense(matrix.to_owned())?;
    let report = sinkhorn(&kernel, &a.to_owned(), &b.to_owned(), epsilon, config)?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    let analytic = grad_wrt_kernel(&kernel, a, b, epsilon, &report.potentials)?;
    let fd = fd_kernel_quotients(matrix, a, b, epsilon, config)?;
    let err = max_rel_disagreement(analytic.grad.view(), fd.view());
    GradReport::new(analytic.grad, Some(err))
}

/// Difference quotients of the converged value over every coordinate of
/// both point clouds, rebuilding the embeddings and re-solving per probe.
/// Returns the (source, target) quotient arrays.
///
/// # Errors
/// Solver failures, unconverged probes, and embedding failures for
/// perturbed points outside the feature domain.
pub fn fd_location_quotients(
    features: &rfot_features::SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<(Array2<f64>, Array2<f64>), GradError> {
    let epsilon = features.spec().epsilon();
    let a = mu.weights().to_owned();
    let b = nu.weights().to_owned();
    let solve_points =
        |x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>| -> Result<f64, GradError> {
            let xi = features.embed_points(x)?;
            let zeta = features.embed_points(y)?;
            let kernel = KernelOperator::factorized(xi, zeta)?;
            converged_value(&kernel, &a, &b, epsilon, config)
        };

    let x0 = mu.points().to_owned();
    let y0 = nu.points().to_owned();
    let mut fd_x = Array2::zeros(x0.dim());
    for k in 0..x0.nrows() {
        for c in 0..x0.ncols() {
            let h = fd_step(x0[[k, c]]);
            let mut plus = x0.clone();
            plus[[k, c]] += h;
            let mut minus = x0.clone();
            minus[[k, c]] -= h;
            let wp = solve_points(plus.view(), y0.view())?;
            let wm = solve_points(minus.view(), y0.view())?;
            fd_x[[k, c]] = (wp - wm) / (2.0 * h);
        }
    }
    let mut fd_y = Array2::zeros(y0.dim());
    for l in 0..y0.nrows() {
        for c in 0..y0.ncols() {
            let h = fd_step(y0[[l, c]]);
            let mut plus = y0.clone();
            plus[[l, c]] += h;
            let mut minus = y0.clone();
            minus[[l, c]] -= h;
            let wp = solve_points(x0.view(), plus.view())?;
            let wm = solve_points(x0.view(), minus.view())?;
            fd_y[[l, c]] = (wp - wm) / (2.0 * h);
        }
    }
    Ok((fd_x, fd_y))
}

/// Checks both location gradients coordinate by coordinate.
///
/// Both sides share one denominator scale (the larger of the two quotient
/// magnitudes), so a nearly balanced instance cannot hide a defect on its
/// quieter side.
///
/// # Errors
/// Solver failures, unconverged probes, embedding failures for perturbed
/// points outside the feature domain, and everything
/// [`grad_wrt_locations`] can report.
pub fn fd_check_locations(
    features: &rfot_features::SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<LocationGradients, GradError> {
    let epsilon = features.spec().epsilon();
    let xi = features.embed(mu)?;
    let zeta = features.embed(nu)?;
    let kernel = KernelOperator::factorized(xi, zeta)?;
    let report = sinkhorn(
        &kernel,
        &mu.weights().to_owned(),
        &nu.weights().to_owned(),
        epsilon,
        config,
    )?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    let analytic = grad_wrt_locations(features, mu, nu, &report.potentials)?;
    let (fd_x, fd_y) = fd_location_quotients(features, mu, nu, config)?;

    let scale = fd_x
        .iter()
        .chain(fd_y.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-12);
    let err_x = analytic
        .wrt_x
        .grad
        .iter()
        .zip(fd_x.iter())
        .fold(0.0f64, |acc, (a, f)| acc.max((a - f).abs() / scale));
    let err_y = analytic
        .wrt_y
        .grad
        .iter()
        .zip(fd_y.iter())
        .fold(0.0f64, |acc, (a, f)| acc.max((a - f).abs() / scale));
    Ok(LocationGradients {
        wrt_x: GradReport::new(analytic.wrt_x.grad, Some(err_x))?,
        wrt_y: GradReport::new(analytic.wrt_y.grad, Some(err_y))?,
    })
}

/// Difference quotients of the converged value over every feature
/// parameter, resampling nothing: each probe rebuilds the map from the
/// perturbed theta rows under the original seed.
///
/// # Errors
/// Solver failures, unconverged probes, and invalid perturbed parameters.
pub fn fd_feature_quotients(
    features: &rfot_features::SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<Array2<f64>, GradError> {
    let epsilon = features.spec().epsilon();
    let a = mu.weights().to_owned();
    let b = nu.weights().to_owned();
    let solve_theta = |theta: Array2<f64>| -> Result<f64, GradError> {
        let probe =
            rfot_features::SampledFeatures::from_theta(features.spec(), theta, features.seed())?;
        let xi = probe.embed(mu)?;
        let zeta = probe.embed(nu)?;
        let kernel = KernelOperator::factorized(xi, zeta)?;
        converged_value(&kernel, &a, &b, epsilon, config)
    };

    let theta0 = features.theta().to_owned();
    let mut fd = Array2::zeros(theta0.dim());
    for j in 0..theta0.nrows() {
        for c in 0..theta0.ncols() {
            let h = fd_step(theta0[[j, c]]);
            let mut plus = theta0.clone();
            plus[[j, c]] += h;
            let mut minus = theta0.clone();
            minus[[j, c]] -= h;
            let wp = solve_theta(plus)?;
            let wm = solve_theta(minus)?;
            fd[[j, c]] = (wp - wm) / (2.0 * h);
        }
    }
    Ok(fd)
}

/// Checks the feature-parameter gradient entry by entry.
///
/// # Errors
/// Solver failures, unconverged probes, and everything
/// [`grad_wrt_features`] can report.
pub fn fd_check_features(
    features: &rfot_features::SampledFeatures,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    config: &SolveConfig,
) -> Result<GradReport, GradError> {
    let epsilon = features.spec().epsilon();
    let xi = features.embed(mu)?;
    let zeta = features.embed(nu)?;
    let kernel = KernelOperator::factorized(xi, zeta)?;
    let report = sinkhorn(
        &kernel,
        &mu.weights().to_owned(),
        &nu.weights().to_owned(),
        epsilon,
        config,
    )?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    let analytic = grad_wrt_features(features, mu, nu, &report.potentials)?;
    let fd = fd_feature_quotients(features, mu, nu, config)?;
    let err = max_rel_disagreement(analytic.grad.view(), fd.view());
    GradReport::new(analytic.grad, Some(err))
}

/// Observed convergence order of the directional difference quotient
/// toward the analytic directional derivative under one step halving:
/// `log2(err(t) / err(t / 2))`. A first-order-correct gradient with a
/// smooth value function yields an order near 2.
///
/// # Errors
/// Solver failures, unconverged probes, and everything
/// [`grad_wrt_kernel`] can report.
pub fn kernel_direction_order(
    matrix: ArrayView2<'_, f64>,
    a: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    epsilon: f64,
    direction: ArrayView2<'_, f64>,
    t: f64,
    config: &SolveConfig,
) -> Result<f64, GradError> {
    let a = a.to_owned();
    let b = b.to_owned();
    let kernel = KernelOperator::dense(matrix.to_owned())?;
    let report = sinkhorn(&kernel, &a, &b, epsilon, config)?;
    if !report.converged {
        return Err(GradError::ProbeUnconverged {
            residual: report.marginal_residual,
        });
    }
    let grad = grad_wrt_kernel(&kernel, a.view(), b.view(), epsilon, &report.potentials)?;
    let products: Vec<f64> = grad
        .grad
        .iter()
        .zip(direction.iter())
        .map(|(g, e)| g * e)
        .collect();
    let directional = linalg::pairwise_sum(&products);

    let quotient_err = |step: f64| -> Result<f64, GradError> {
        let plus = matrix.to_owned() + &(direction.to_owned() * step);
        let minus = matrix.to_owned() - &(direction.to_owned() * step);
        let wp = converged_value(&KernelOperator::dense(plus)?, &a, &b, epsilon, config)?;
        let wm = converged_value(&KernelOperator::dense(minus)?, &a, &b, epsilon, config)?;
        Ok(((wp - wm) / (2.0 * step) - directional).abs())
    };
    let coarse = quotient_err(t)?;
    let fine = quotient_err(t / 2.0)?;
    Ok((coarse / fine).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn fd_step_floors_at_unit_scale() {
        assert_eq!(fd_step(0.0), 1e-6);
        assert_eq!(fd_step(0.5), 1e-6);
        assert_eq!(fd_step(-3.0), 3e-6);
    }

    #[test]
    fn disagreement_uses_the_largest_quotient_as_scale() {
        let analytic = array![[1.0, 10.0]];
        let fd = array![[1.1, 10.0]];
        let err = max_rel_disagreement(analytic.view(), fd.view());
        assert!((err - 0.01).abs() < 1e-12);
    }
}
