//! Concentration constants, multiplicative approximation diagnostics, and the
//! feature-budget calculator.
//!
//! The budget for a target multiplicative accuracy delta with failure
//! probability tau is
//!
//!   r = ceil( scale * (psi^2 / delta^2)
//!             * min( d eps^{-1} ||C||_inf^2 + d log(psi V D / (tau delta)),
//!                    log(n / tau) ) ),
//!
//! where psi bounds the per-sample kernel ratio, V bounds the feature
//! gradient second moment, and D = sup ||(x, y)|| over the product domain.
//! The theory fixes these only up to a constant, so `scale` is an explicit
//! knob with default [`DEFAULT_BUDGET_CONSTANT`].

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::arccos::{arccos_feature, arccos_kernel};
use crate::error::FeatureError;
use crate::gaussian::gaussian_kernel;
use crate::rng::{CounterRng, STREAM_SEARCH};
use crate::sampled::SampledFeatures;
use crate::spec::{FeatureKind, FeatureMapSpec};

/// Default multiplier on the budget formula, matching the Hoeffding exponent
/// r delta^2 / (2 psi^2) >= log(2 n^2 / tau).
pub const DEFAULT_BUDGET_CONSTANT: f64 = 2.0;

/// Multiplier applied to numerically maximized arc-cosine constants: the
/// search lower-bounds a supremum, so its result is inflated to remain a
/// usable upper bound.
const SEARCH_INFLATION: f64 = 1.05;

/// Bounds governing the concentration of the sampled kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConstants {
    /// Pointwise bound on phi(x,u)^T phi(y,u) / k(x,y) used in exponential
    /// tail estimates.
    pub psi: f64,
    /// Lower bound on the exact kernel over the domain.
    pub kappa_lb: f64,
    /// Bound on E_u ||grad_x phi(x, u)||^2.
    pub grad_second_moment: f64,
    /// sup ||(x, y)||_2 over the product of the two domain balls.
    pub domain_norm: f64,
    /// u-space truncation radius when the constants came from a numerical
    /// search rather than a closed form.
    pub truncation_radius: Option<f64>,
}

/// Largest multiplicative deviation of the sampled kernel from the exact one
/// over a finite grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioErrorReport {
    /// sup over the grid of |k_theta(x, y) / k(x, y) - 1|.
    pub max_ratio_dev: f64,
    /// Grid indices attaining the supremum.
    pub argmax: (usize, usize),
}

/// The exact kernel k(x, y) reproduced in expectation by the map.
///
/// # Errors
/// [`FeatureError::UnsupportedSpec`] for custom maps or arc-cosine degrees
/// without a closed form.
pub fn exact_kernel(
    spec: &FeatureMapSpec,
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
) -> Result<f64, FeatureError> {
    match spec.kind() {
        FeatureKind::Gaussian => Ok(gaussian_kernel(x, y, spec.epsilon())),
        FeatureKind::ArccosPerturbed { s, kappa, .. } => Ok(arccos_kernel(x, y, s)? + kappa),
        FeatureKind::Custom => Err(FeatureError::UnsupportedSpec {
            what: "exact kernel",
        }),
    }
}

/// Evaluates sup over X x Y of |k_theta(x, y) / k(x, y) - 1|.
///
/// # Errors
/// Propagates embedding errors and [`FeatureError::UnsupportedSpec`] when the
/// exact kernel has no closed form.
pub fn ratio_error(
    features: &SampledFeatures,
    xs: ArrayView2<'_, f64>,
    ys: ArrayView2<'_, f64>,
) -> Result<RatioErrorReport, FeatureError> {
    let ex = features.embed_points(xs)?;
    let ey = features.embed_points(ys)?;
    let mut max_ratio_dev = f64::NEG_INFINITY;
    let mut argmax = (0, 0);
    for i in 0..xs.nrows() {
        let row = ex.row(i);
        for j in 0..ys.nrows() {
            let sampled = rfot_core::linalg::dot(
                row.as_slice().expect("contiguous"),
                ey.row(j).as_slice().expect("contiguous"),
            );
            let exact = exact_kernel(features.spec(), xs.row(i), ys.row(j))?;
            let dev = (sampled / exact - 1.0).abs();
            if dev > max_ratio_dev {
                max_ratio_dev = dev;
                argmax = (i, j);
            }
        }
    }
    Ok(RatioErrorReport {
        max_ratio_dev,
        argmax,
    })
}

/// Concentration constants for the shipped maps.
///
/// Gaussian constants are closed-form in q; arc-cosine constants are
/// numerically maximized over (x, y, u) with u truncated to B(0, 8 sigma) and
/// inflated by 5% to cover search slack (the search lower-bounds the
/// supremum). The degree-0 map has zero gradient almost everywhere, so its
/// gradient moment is floored at the smallest positive double.
///
/// # Errors
/// [`FeatureError::UnsupportedSpec`] for custom maps.
pub fn concentration_constants(
    spec: &FeatureMapSpec,
) -> Result<ConcentrationConstants, FeatureError> {
    let d = spec.dim() as f64;
    let radius = spec.radius();
    let eps = spec.epsilon();
    match spec.kind() {
        FeatureKind::Gaussian => {
            let q = spec.gaussian_bandwidth()?.q;
            let psi = 2f64.powf(d / 2.0 + 1.0) * q.powf(d / 2.0);
            let kappa_lb = (-4.0 * radius * radius / eps).exp();
            let grad_second_moment = 2f64.powf(d / 2.0 + 3.0)
                * q.powf(d / 2.0)
                * ((radius / eps).powi(2) + q / (4.0 * eps));
            Ok(ConcentrationConstants {
                psi,
                kappa_lb,
                grad_second_moment,
                domain_norm: std::f64::consts::SQRT_2 * radius,
                truncation_radius: None,
            })
        }
        FeatureKind::ArccosPerturbed { s, kappa, sigma } => {
            let truncation = 8.0 * sigma;
            let psi = maximize_arccos_ratio(spec, truncation)? * SEARCH_INFLATION;
            let grad = maximize_arccos_grad_norm(spec, truncation);
            let grad_second_moment =
                (grad * SEARCH_INFLATION).max(f64::MIN_POSITIVE);
            let _ = s;
            Ok(ConcentrationConstants {
                psi,
                kappa_lb: kappa,
                grad_second_moment,
                domain_norm: std::f64::consts::SQRT_2 * radius,
                truncation_radius: Some(truncation),
            })
        }
        FeatureKind::Custom => Err(FeatureError::UnsupportedSpec {
            what: "concentration constants",
        }),
    }
}

/// Number of sampled features prescribed for multiplicative accuracy `delta`
/// with failure probability `tau`, scaled by the explicit constant `scale`.
///
/// # Errors
/// - [`FeatureError::InvalidProbability`] when delta or tau leave (0, 1).
/// - [`FeatureError::NonPositiveArgument`] for non-positive eps, cost bound,
///   n, or scale.
#[allow(clippy::too_many_arguments)]
pub fn feature_budget(
    delta: f64,
    tau: f64,
    constants: &ConcentrationConstants,
    d: usize,
    epsilon: f64,
    c_inf: f64,
    n: usize,
    scale: f64,
) -> Result<usize, FeatureError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FeatureError::InvalidProbability("delta"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(FeatureError::InvalidProbability("tau"));
    }
    if d == 0 {
        return Err(FeatureError::ZeroDimension);
    }
    for (argument, value) in [
        ("epsilon", epsilon),
        ("c_inf", c_inf),
        ("n", n as f64),
        ("scale", scale),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(FeatureError::NonPositiveArgument { argument, value });
        }
    }
    let d = d as f64;
    let continuum_branch = d / epsilon * c_inf * c_inf
        + d * (constants.psi * constants.grad_second_moment * constants.domain_norm
            / (tau * delta))
            .ln();
    let finite_branch = (n as f64 / tau).ln();
    let bracket = continuum_branch.min(finite_branch);
    let raw = scale * constants.psi * constants.psi / (delta * delta) * bracket;
    Ok((raw.ceil().max(1.0)) as usize)
}

fn sample_in_ball(rng: &CounterRng, index: u64, dim: usize, radius: f64, tag: u64) -> Array1<f64> {
    let mut z = Array1::zeros(dim);
    let mut norm_sq = 0.0;
    for k in 0..dim {
        let g = rng.normal(index, tag * 1000 + k as u64);
        z[k] = g;
        norm_sq += g * g;
    }
    let norm = norm_sq.sqrt().max(f64::MIN_POSITIVE);
    let t = rng.uniform(index, tag * 1000 + dim as u64, 2);
    let target = radius * t.powf(1.0 / dim as f64);
    z.mapv_inplace(|c| c / norm * target);
    z
}

fn clamp_to_ball(x: &mut Array1<f64>, radius: f64) {
    let norm = x.iter().map(|&c| c * c).sum::<f64>().sqrt();
    if norm > radius {
        let shrink = radius / norm;
        x.mapv_inplace(|c| c * shrink);
    }
}

fn arccos_ratio(
    spec: &FeatureMapSpec,
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
    u: ArrayView1<'_, f64>,
) -> Result<f64, FeatureError> {
    let px = arccos_feature(x, u, spec);
    let py = arccos_feature(y, u, spec);
    let product = px[0] * py[0] + px[1] * py[1];
    Ok(product / exact_kernel(spec, x, y)?)
}

fn maximize_arccos_ratio(spec: &FeatureMapSpec, truncation: f64) -> Result<f64, FeatureError> {
    let dim = spec.dim();
    let radius = spec.radius();
    let rng = CounterRng::new(STREAM_SEARCH, 0);

    let mut starts: Vec<(f64, Array1<f64>, Array1<f64>, Array1<f64>)> = Vec::new();
    for i in 0..400u64 {
        let x = sample_in_ball(&rng, i, dim, radius, 0);
        let y = sample_in_ball(&rng, i, dim, radius, 1);
        let u = sample_in_ball(&rng, i, dim, truncation, 2);
        let value = arccos_ratio(spec, x.view(), y.view(), u.view())?;
        starts.push((value, x, y, u));
    }
    starts.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite ratios"));
    starts.truncate(8);

    let mut best = starts[0].0;
    for (start_idx, (value, x0, y0, u0)) in starts.into_iter().enumerate() {
        let (mut cur, mut x, mut y, mut u) = (value, x0, y0, u0);
        let mut step = 0.5;
        for iter in 0..1200u64 {
            let idx = 1_000_000 + start_idx as u64 * 10_000 + iter;
            let mut xp = x.clone();
            let mut yp = y.clone();
            let mut up = u.clone();
            for k in 0..dim {
                xp[k] += step * radius * (rng.uniform(idx, k as u64, 3) - 0.5);
                yp[k] += step * radius * (rng.uniform(idx, k as u64, 4) - 0.5);
                up[k] += step * truncation * (rng.uniform(idx, k as u64, 5) - 0.5);
            }
            clamp_to_ball(&mut xp, radius);
            clamp_to_ball(&mut yp, radius);
            clamp_to_ball(&mut up, truncation);
            let proposal = arccos_ratio(spec, xp.view(), yp.view(), up.view())?;
            if proposal > cur {
                cur = proposal;
                x = xp;
                y = yp;
                u = up;
            } else {
                step *= 0.995;
            }
        }
        best = best.max(cur);
    }
    Ok(best)
}

fn arccos_grad_norm_sq(spec: &FeatureMapSpec, x: ArrayView1<'_, f64>, u: ArrayView1<'_, f64>) -> f64 {
    let FeatureKind::ArccosPerturbed { s, sigma, .. } = spec.kind() else {
        return 0.0;
    };
    if s == 0 {
        return 0.0;
    }
    let dot: f64 = x.iter().zip(u.iter()).map(|(&a, &b)| a * b).sum();
    if dot <= 0.0 {
        return 0.0;
    }
    let d = spec.dim() as f64;
    let norm_u_sq: f64 = u.iter().map(|&c| c * c).sum();
    let scale = sigma.powf(d / 2.0) * std::f64::consts::SQRT_2;
    let decay = (-norm_u_sq / 4.0 * (1.0 - 1.0 / (sigma * sigma))).exp();
    let slope = scale * decay * s as f64 * dot.powi(s as i32 - 1);
    slope * slope * norm_u_sq
}

fn maximize_arccos_grad_norm(spec: &FeatureMapSpec, truncation: f64) -> f64 {
    let dim = spec.dim();
    let radius = spec.radius();
    let rng = CounterRng::new(STREAM_SEARCH, 1);

    let mut best = 0.0f64;
    let mut best_x = Array1::zeros(dim);
    let mut best_u = Array1::zeros(dim);
    for i in 0..400u64 {
        let x = sample_in_ball(&rng, i, dim, radius, 0);
        let u = sample_in_ball(&rng, i, dim, truncation, 1);
        let value = arccos_grad_norm_sq(spec, x.view(), u.view());
        if value > best {
            best = value;
            best_x = x;
            best_u = u;
        }
    }
    let mut step = 0.5;
    let (mut x, mut u) = (best_x, best_u);
    for iter in 0..2000u64 {
        let idx = 2_000_000 + iter;
        let mut xp = x.clone();
        let mut up = u.clone();
        for k in 0..dim {
            xp[k] += step * radius * (rng.uniform(idx, k as u64, 3) - 0.5);
            up[k] += step * truncation * (rng.uniform(idx, k as u64, 4) - 0.5);
        }
        clamp_to_ball(&mut xp, radius);
        clamp_to_ball(&mut up, truncation);
        let proposal = arccos_grad_norm_sq(spec, xp.view(), up.view());
        if proposal > best {
            best = proposal;
            x = xp;
            u = up;
        } else {
            step *= 0.997;
        }
    }
    best
}
