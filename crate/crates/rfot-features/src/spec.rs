//! Feature-map specifications and the Gaussian bandwidth derivation.
//!
//! A spec fixes the map family, the regularization eps, the domain ball
//! radius R (points must lie in B(0, R)), and the dimension d. For the
//! Gaussian map the sampling law and normalization are driven by
//!
//!   q = R^2 / (2 eps d W0(R^2 / (eps d))),    sigma^2 = q eps / 4,
//!
//! where W0 is the principal Lambert branch. Writing t = R^2/(eps d) this is
//! q = t / (2 W0(t)), and since e^{W0(t)} = t / W0(t) one gets 2q = e^{W0(t)},
//! so 2q >= 1 always holds and (2q)^{d/4} is a safe normalizer.

use serde::{Deserialize, Serialize};

use crate::error::FeatureError;
use crate::lambert::lambert_w0;

/// Which positive feature family to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Scalar exponential features reproducing exp(-||x - y||^2 / eps).
    Gaussian,
    /// Rectified-polynomial features of degree `s` with a constant
    /// sqrt(kappa) slot, reproducing the degree-s arc-cosine kernel plus
    /// kappa.
    ArccosPerturbed { s: u32, kappa: f64, sigma: f64 },
    /// User-supplied embeddings; sampling and exact-kernel diagnostics are
    /// unavailable.
    Custom,
}

/// Validated description of a feature map on the ball B(0, R) in R^d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    kind: FeatureKind,
    epsilon: f64,
    radius: f64,
    dim: usize,
}

/// Derived Gaussian parameters: the exponent divisor q and the sampling
/// variance sigma^2 = q eps / 4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBandwidth {
    pub q: f64,
    pub sigma_sq: f64,
}

impl FeatureMapSpec {
    /// Gaussian map spec; derives q via the Lambert function and checks it is
    /// finite and positive.
    pub fn gaussian(epsilon: f64, radius: f64, dim: usize) -> Result<Self, FeatureError> {
        let spec = Self::validate_common(FeatureKind::Gaussian, epsilon, radius, dim)?;
        let bandwidth = spec.gaussian_bandwidth()?;
        if !(bandwidth.q.is_finite() && bandwidth.q > 0.0) {
            return Err(FeatureError::NonPositiveArgument {
                argument: "derived gaussian bandwidth q",
                value: bandwidth.q,
            });
        }
        Ok(spec)
    }

    /// Arc-cosine map spec of degree `s` with perturbation `kappa` and
    /// projection scale `sigma`.
    pub fn arccos_perturbed(
        s: u32,
        kappa: f64,
        sigma: f64,
        epsilon: f64,
        radius: f64,
        dim: usize,
    ) -> Result<Self, FeatureError> {
        if !(sigma.is_finite() && sigma > 1.0) {
            return Err(FeatureError::SigmaNotAboveOne(sigma));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(FeatureError::NonPositiveKappa(kappa));
        }
        Self::validate_common(
            FeatureKind::ArccosPerturbed { s, kappa, sigma },
            epsilon,
            radius,
            dim,
        )
    }

    /// Spec placeholder for caller-provided embeddings.
    pub fn custom(epsilon: f64, radius: f64, dim: usize) -> Result<Self, FeatureError> {
        Self::validate_common(FeatureKind::Custom, epsilon, radius, dim)
    }

    fn validate_common(
        kind: FeatureKind,
        epsilon: f64,
        radius: f64,
        dim: usize,
    ) -> Result<Self, FeatureError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(FeatureError::NonPositiveEpsilon(epsilon));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(FeatureError::NonPositiveRadius(radius));
        }
        if dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        Ok(Self {
            kind,
            epsilon,
            radius,
            dim,
        })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of embedding slots contributed per sampled parameter:
    /// 1 for Gaussian, 2 for arc-cosine (feature slot plus kappa slot).
    pub fn block_dim(&self) -> usize {
        match self.kind {
            FeatureKind::Gaussian => 1,
            FeatureKind::ArccosPerturbed { .. } => 2,
            FeatureKind::Custom => 1,
        }
    }

    /// q and sigma^2 for the Gaussian map.
    ///
    /// # Errors
    /// [`FeatureError::UnsupportedSpec`] for non-Gaussian kinds.
    pub fn gaussian_bandwidth(&self) -> Result<GaussianBandwidth, FeatureError> {
        match self.kind {
            FeatureKind::Gaussian => {
                let t = self.radius * self.radius / (self.epsilon * self.dim as f64);
                let q = t / (2.0 * lambert_w0(t)?);
                Ok(GaussianBandwidth {
                    q,
                    sigma_sq: q * self.epsilon / 4.0,
                })
            }
            _ => Err(FeatureError::UnsupportedSpec {
                what: "gaussian bandwidth",
            }),
        }
    }

    /// Standard deviation of the parameter sampling law: sqrt(q eps / 4) for
    /// Gaussian, sigma for arc-cosine.
    ///
    /// # Errors
    /// [`FeatureError::UnsupportedSpec`] for custom maps.
    pub fn sampling_std(&self) -> Result<f64, FeatureError> {
        match self.kind {
            FeatureKind::Gaussian => Ok(self.gaussian_bandwidth()?.sigma_sq.sqrt()),
            FeatureKind::ArccosPerturbed { sigma, .. } => Ok(sigma),
            FeatureKind::Custom => Err(FeatureError::UnsupportedSpec {
                what: "sampling law",
            }),
        }
    }
}
