//! Two-slot positive features for the perturbed arc-cosine kernel
//! k_s(x, y) + kappa.
//!
//! With u drawn from N(0, sigma^2 I_d), sigma > 1, the feature is
//!
//!   phi(x, u) = ( sigma^{d/2} sqrt(2) max(0, u^T x)^s
//!                   exp(-||u||^2 (1 - 1/sigma^2) / 4),
//!                 sqrt(kappa) ),
//!
//! and E_u[phi(x, u)^T phi(y, u)] = k_s(x, y) + kappa: the exponential factor
//! squared times the N(0, sigma^2) density is proportional to the N(0, I)
//! density, reducing the first slot to the classic rectified-projection
//! identity
//!
//!   k_s(x, y) = (1/pi) ||x||^s ||y||^s J_s(theta),
//!   theta = arccos(x^T y / (||x|| ||y||)),
//!   J_0(theta) = pi - theta,    J_1(theta) = sin(theta) + (pi - theta) cos(theta).
//!
//! The constant second slot keeps every feature dot product at least kappa,
//! so the induced kernel stays strictly positive even where the rectifier
//! zeroes the first slot.
//!
//! Degree-0 convention: max(0, t)^0 is taken as 1 for t > 0 and 0 for t <= 0,
//! matching the sign-feature reading where the rectifier gates the slot.

use ndarray::ArrayView1;

use crate::error::FeatureError;
use crate::spec::{FeatureKind, FeatureMapSpec};

fn norm(x: ArrayView1<'_, f64>) -> f64 {
    x.iter().map(|&c| c * c).sum::<f64>().sqrt()
}

fn dot(x: ArrayView1<'_, f64>, u: ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(u.iter()).map(|(&a, &b)| a * b).sum()
}

fn rectified_power(t: f64, s: u32) -> f64 {
    if t > 0.0 {
        t.powi(s as i32)
    } else {
        0.0
    }
}

/// Precomputed evaluator for the two-slot feature.
#[derive(Debug, Clone, Copy)]
pub struct ArccosEval {
    scale: f64,
    decay_rate: f64,
    sqrt_kappa: f64,
    s: u32,
}

impl ArccosEval {
    /// Derives the constants once from an arc-cosine spec.
    ///
    /// # Errors
    /// [`FeatureError::UnsupportedSpec`] for other kinds.
    pub fn new(spec: &FeatureMapSpec) -> Result<Self, FeatureError> {
        let FeatureKind::ArccosPerturbed { s, kappa, sigma } = spec.kind() else {
            return Err(FeatureError::UnsupportedSpec {
                what: "arccos evaluator",
            });
        };
        let d = spec.dim() as f64;
        Ok(Self {
            scale: sigma.powf(d / 2.0) * std::f64::consts::SQRT_2,
            decay_rate: (1.0 - 1.0 / (sigma * sigma)) / 4.0,
            sqrt_kappa: kappa.sqrt(),
            s,
        })
    }

    /// phi(x, u) = (rectified slot, sqrt(kappa) slot).
    #[inline]
    pub fn eval(&self, x: &[f64], u: &[f64]) -> [f64; 2] {
        let mut dot = 0.0;
        let mut u_sq = 0.0;
        for (&xk, &uk) in x.iter().zip(u.iter()) {
            dot += xk * uk;
            u_sq += uk * uk;
        }
        let slot1 = self.scale * rectified_power(dot, self.s) * (-u_sq * self.decay_rate).exp();
        [slot1, self.sqrt_kappa]
    }
}

/// phi(x, u) as the pair (rectified slot, sqrt(kappa) slot).
///
/// # Panics
/// Panics when called with a non-arccos spec.
pub fn arccos_feature(
    x: ArrayView1<'_, f64>,
    u: ArrayView1<'_, f64>,
    spec: &FeatureMapSpec,
) -> [f64; 2] {
    let eval = ArccosEval::new(spec).expect("arccos_feature needs an arccos spec");
    eval.eval(
        x.as_slice().expect("contiguous"),
        u.as_slice().expect("contiguous"),
    )
}

/// The degree-s angular factor J_s(theta) on [0, pi], shipped for s in {0, 1}.
pub fn angular_factor(theta: f64, s: u32) -> Result<f64, FeatureError> {
    use std::f64::consts::PI;
    match s {
        0 => Ok(PI - theta),
        1 => Ok(theta.sin() + (PI - theta) * theta.cos()),
        _ => Err(FeatureError::UnsupportedSpec {
            what: "closed-form angular factor for degree s > 1",
        }),
    }
}

/// The unperturbed degree-s arc-cosine kernel
/// k_s(x, y) = (1/pi) ||x||^s ||y||^s J_s(theta).
///
/// Zero-norm inputs return 0, matching the feature convention where a zero
/// dot product gates the rectified slot.
pub fn arccos_kernel(
    x: ArrayView1<'_, f64>,
    y: ArrayView1<'_, f64>,
    s: u32,
) -> Result<f64, FeatureError> {
    let nx = norm(x);
    let ny = norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Ok(0.0);
    }
    let cosine = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0);
    let theta = cosine.acos();
    Ok(nx.powi(s as i32) * ny.powi(s as i32) * angular_factor(theta, s)? / std::f64::consts::PI)
}
