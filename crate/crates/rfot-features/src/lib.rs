//! Positive random feature maps whose sampled embeddings factorize a Gibbs
//! kernel.
//!
//! Each shipped map comes with a sampling law rho and a positive feature
//! phi(x, u) such that E_{u ~ rho}[phi(x, u)^T phi(y, u)] equals a target
//! kernel k(x, y) exactly:
//!
//! - Gaussian: k(x, y) = exp(-||x - y||^2 / eps) on a ball B(0, R), with the
//!   bandwidth set through the Lambert W0 function.
//! - Arc-cosine (perturbed): k(x, y) = k_s(x, y) + kappa, rectified
//!   projections of degree s plus a constant slot that keeps every feature
//!   dot product at least kappa.
//!
//! Averaging r i.i.d. samples gives the embedding phi_theta with kernel
//! k_theta = phi_theta^T phi_theta concentrating multiplicatively around k.
//! The crate also ships the concentration constants (psi, kappa_lb, V, D)
//! driving the tail bounds, a grid diagnostic for the multiplicative error,
//! and the calculator for the number of features needed to hit a target
//! accuracy.

#![forbid(unsafe_code)]

pub mod arccos;
pub mod diagnostics;
pub mod error;
pub mod gaussian;
pub mod lambert;
pub mod rng;
pub mod sampled;
pub mod spec;

pub use arccos::{angular_factor, arccos_feature, arccos_kernel, ArccosEval};
pub use diagnostics::{
    concentration_constants, exact_kernel, feature_budget, ratio_error, ConcentrationConstants,
    RatioErrorReport, DEFAULT_BUDGET_CONSTANT,
};
pub use error::FeatureError;
pub use gaussian::{
    gaussian_feature, gaussian_feature_dx, gaussian_feature_du, gaussian_kernel, GaussianEval,
};
pub use lambert::lambert_w0;
pub use rng::{CounterRng, STREAM_DATASET, STREAM_FEATURES};
pub use sampled::{sample_features, FeatureSetDescriptor, SampledFeatures};
pub use spec::{FeatureKind, FeatureMapSpec, GaussianBandwidth};

/// Convenience alias used throughout the crate.
pub type Result<T, E = FeatureError> = core::result::Result<T, E>;
