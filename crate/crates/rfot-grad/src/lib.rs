//! Analytic gradients of the regularized transport value.
//!
//! At a converged dual solution the value behaves like an envelope: the
//! optimal potentials can be frozen while the differentiated quantity
//! moves, which turns every derivative into a contraction against the
//! outer product of the true scaling vectors,
//!
//! ```text
//!     dW/dK_ij = -eps u~_i v~_j.
//! ```
//!
//! Three objects can move. Kernel entries differentiate directly (dense
//! only); support points differentiate through their embedding rows; the
//! sampled feature parameters differentiate through both embeddings at
//! once. The factorized contractions cost O(r d (n + m)) and never build
//! an n x m intermediate.
//!
//! Because an envelope gradient is only as accurate as the dual solution
//! it is frozen at, every operation recomputes the marginal residual from
//! its inputs and refuses potentials that miss
//! [`POTENTIAL_RESIDUAL_GATE`]. Gradients are always computed from
//! converged potentials, never by differentiating through the iteration
//! history.
//!
//! The finite-difference harnesses re-solve perturbed problems and compare
//! central difference quotients against the analytic formulas; the
//! reported discrepancy is relative to the largest quotient magnitude.

#![forbid(unsafe_code)]

mod error;
mod fd;
mod feature_grad;
mod kernel_grad;
mod location_grad;
mod report;
mod scalings;

pub use error::GradError;
pub use fd::{
    fd_check_features, fd_check_kernel, fd_check_locations, fd_feature_quotients,
    fd_kernel_quotients, fd_location_quotients, fd_step, kernel_direction_order,
    max_rel_disagreement,
};
pub use feature_grad::grad_wrt_features;
pub use kernel_grad::grad_wrt_kernel;
pub use location_grad::{
    divergence_location_grad, grad_wrt_locations, grad_wrt_locations_squared_euclidean,
};
pub use report::{GradReport, LocationGradients};

/// Largest marginal residual accepted by the gradient operations.
///
/// Envelope differentiation holds at the dual optimum; the first-order
/// error of the gradient tracks the distance from it, so potentials are
/// required to satisfy both marginals to this tolerance in L1.
pub const POTENTIAL_RESIDUAL_GATE: f64 = 1e-8;

/// Convenience alias for gradient results.
pub type Result<T, E = GradError> = std::result::Result<T, E>;
