//! Scalar positive features for the Gaussian kernel exp(-||x - y||^2 / eps).
//!
//! With u drawn from N(0, (q eps / 4) I_d) and
//!
//!   phi(x, u) = (2q)^{d/4} exp(-2 ||x - u||^2 / eps) exp(||u||^2 / (q eps)),
//!
//! the product phi(x, u) phi(y, u) integrates over the sampling law to
//! exp(-||x - y||^2 / eps) exactly; completing the square in u shows the two
//! quadratic forms recombine into the kernel times a Gaussian density in u.
//! The feature is strictly positive everywhere, which is what lets the
//! downstream solver treat the factorized kernel like a Gibbs kernel.
//!
//! [`GaussianEval`] hoists the Lambert-derived constants out of the per-call
//! path; embedding loops evaluate millions of features, so the q derivation
//! must not sit inside them.

use ndarray::{Array1, ArrayView1};

use crate::error::FeatureError;
use crate::spec::{FeatureKind, FeatureMapSpec};

/// Precomputed evaluator for phi and its two gradients.
#[derive(Debug, Clone, Copy)]
pub struct GaussianEval {
    norm_factor: f64,
    two_over_eps: f64,
    inv_q_eps: f64,
    four_over_eps: f64,
    two_over_q_eps: f64,
}

impl GaussianEval {
    /// Derives the constants once from a Gaussian spec.
    ///
    /// # Errors
    /// [`FeatureError::UnsupportedSpec`] for non-Gaussian kinds.
    pub fn new(spec: &FeatureMapSpec) -> Result<Self, FeatureError> {
        if !matches!(spec.kind(), FeatureKind::Gaussian) {
            return Err(FeatureError::UnsupportedSpec {
                what: "gaussian evaluator",
            });
        }
        let q = spec.gaussian_bandwidth()?.q;
        let eps = spec.epsilon();
        let d = spec.dim() as f64;
        Ok(Self {
            norm_factor: (2.0 * q).powf(d / 4.0),
            two_over_eps: 2.0 / eps,
            inv_q_eps: 1.0 / (q * eps),
            four_over_eps: 4.0 / eps,
            two_over_q_eps: 2.0 / (q * eps),
        })
    }

    /// phi(x, u).
    #[inline]
    pub fn eval(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut dist_sq = 0.0;
        let mut u_sq = 0.0;
        for (&xk, &uk) in x.iter().zip(u.iter()) {
            let diff = xk - uk;
            dist_sq += diff * diff;
            u_sq += uk * uk;
        }
        self.norm_factor * (-self.two_over_eps * dist_sq + self.inv_q_eps * u_sq).exp()
    }

    /// phi(x, u), filling grad_x phi = -(4 / eps)(x - u) phi into `dx`.
    #[inline]
    pub fn eval_with_dx(&self, x: &[f64], u: &[f64], dx: &mut [f64]) -> f64 {
        let phi = self.eval(x, u);
        for ((dst, &xk), &uk) in dx.iter_mut().zip(x.iter()).zip(u.iter()) {
            *dst = -self.four_over_eps * (xk - uk) * phi;
        }
        phi
    }

    /// phi(x, u), filling grad_u phi = phi ((4/eps)(x - u) + (2/(q eps)) u)
    /// into `du`.
    #[inline]
    pub fn eval_with_du(&self, x: &[f64], u: &[f64], du: &mut [f64]) -> f64 {
        let phi = self.eval(x, u);
        for ((dst, &xk), &uk) in du.iter_mut().zip(x.iter()).zip(u.iter()) {
            *dst = phi * (self.four_over_eps * (xk - uk) + self.two_over_q_eps * uk);
        }
        phi
    }
}

/// phi(x, u) for a Gaussian spec.
///
/// # Panics
/// Panics when called with a non-Gaussian spec; the sampled-feature layer
/// routes by kind before reaching here.
pub fn gaussian_feature(
    x: ArrayView1<'_, f64>,
    u: ArrayView1<'_, f64>,
    spec: &FeatureMapSpec,
) -> f64 {
    let eval = GaussianEval::new(spec).expect("gaussian_feature needs a gaussian spec");
    eval.eval(
        x.as_slice().expect("contiguous"),
        u.as_slice().expect("contiguous"),
    )
}

/// Gradient of phi with respect to the point x:
/// grad_x phi = -(4 / eps) (x - u) phi(x, u).
pub fn gaussian_feature_dx(
    x: ArrayView1<'_, f64>,
    u: ArrayView1<'_, f64>,
    spec: &FeatureMapSpec,
) -> Array1<f64> {
    let eval = GaussianEval::new(spec).expect("gaussian_feature_dx needs a gaussian spec");
    let mut dx = vec![0.0; x.len()];
    eval.eval_with_dx(
        x.as_slice().expect("contiguous"),
        u.as_slice().expect("contiguous"),
        &mut dx,
    );
    Array1::from(dx)
}

/// Gradient of phi with respect to the sampled parameter u:
/// grad_u phi = phi * ((4 / eps)(x - u) + (2 / (q eps)) u).
pub fn gaussian_feature_du(
    x: ArrayView1<'_, f64>,
    u: ArrayView1<'_, f64>,
    spec: &FeatureMapSpec,
) -> Array1<f64> {
    let eval = GaussianEval::new(spec).expect("gaussian_feature_du needs a gaussian spec");
    let mut du = vec![0.0; x.len()];
    eval.eval_with_du(
        x.as_slice().expect("contiguous"),
        u.as_slice().expect("contiguous"),
        &mut du,
    );
    Array1::from(du)
}

/// The target kernel exp(-||x - y||^2 / eps).
pub fn gaussian_kernel(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, epsilon: f64) -> f64 {
    let dist_sq: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    (-dist_sq / epsilon).exp()
}
