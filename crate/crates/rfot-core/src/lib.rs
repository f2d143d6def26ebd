//! Discrete measures, ground costs, and Gibbs kernel operators for entropic
//! optimal transport.
//!
//! The central object is the kernel K with entries K_ij = exp(-C_ij / eps)
//! for a cost matrix C and regularization eps > 0. Scaling solvers only ever
//! touch K through the products K w and K^T u, so the kernel is exposed as an
//! operator with two interchangeable backings:
//!
//! - `Dense` stores the n x m matrix explicitly.
//! - `Factorized` stores feature embeddings X (n x p) and Z (m x p) with
//!   nonnegative entries and applies K = X Z^T in O((n + m) p) per product,
//!   never materializing the n x m matrix.
//!
//! Both backings use the same fixed summation order, so results are
//! bit-reproducible across runs on the same build.
//!
//! Invariants enforced at construction:
//! - `DiscreteMeasure`: weights strictly positive, summing to 1 within 1e-12;
//!   all points share one dimension d >= 1.
//! - `CostSpec`: eps > 0.
//! - `KernelOperator::Dense`: entries finite and nonnegative; exact zeros are
//!   counted and reported as an underflow diagnostic rather than rejected.
//! - `KernelOperator::Factorized`: entries finite and nonnegative.

#![forbid(unsafe_code)]

pub mod cost;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod measure;
pub mod potentials;

pub use cost::{cost_from_features, cost_matrix, cost_matrix_from_embeddings, CostKind, CostSpec};
pub use error::{CoreError, IoError};
pub use kernel::{gibbs_kernel, CostClass, KernelOperator};
pub use measure::DiscreteMeasure;
pub use potentials::DualPotentials;

/// Convenience alias used throughout the crate.
pub type Result<T, E = CoreError> = core::result::Result<T, E>;
