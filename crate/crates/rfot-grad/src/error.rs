//! Error type for gradient computation.

use rfot_core::CoreError;
use rfot_features::FeatureError;
use rfot_solver::SolverError;
use thiserror::Error;

/// Failure modes of the gradient operations and their finite-difference
/// harnesses.
#[derive(Debug, Error)]
pub enum GradError {
    /// The supplied potentials do not satisfy the marginal constraints
    /// tightly enough. Envelope gradients are only as accurate as the dual
    /// solution they are evaluated at, so a loose solve would silently
    /// poison every downstream derivative.
    #[error(
        "potentials not converged: marginal residual {residual:.3e} exceeds \
         the gradient gate {required:.3e}"
    )]
    UnconvergedPotentials { residual: f64, required: f64 },

    /// The feature map does not ship analytic derivatives. Only the Gaussian
    /// map carries d(phi)/dx and d(phi)/du in closed form.
    #[error("no analytic jacobian for the {map} feature map")]
    JacobianUnavailable { map: &'static str },

    /// Kernel-matrix gradients are defined entrywise and therefore require
    /// the dense representation; factorized kernels differentiate through
    /// their features or point locations instead.
    #[error("kernel gradient requires a dense kernel operator")]
    DenseKernelRequired,

    /// An input dimension disagrees with the rest of the problem.
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A potential vector or an intermediate contraction left the finite
    /// range, typically because enormous stabilization offsets cannot be
    /// folded back into plain f64 scalings.
    #[error("non-finite value encountered in {what}")]
    NonFinite { what: &'static str },

    /// A finite-difference probe failed to re-solve to tolerance, so the
    /// difference quotient would be meaningless.
    #[error("finite-difference probe did not converge (residual {residual:.3e})")]
    ProbeUnconverged { residual: f64 },

    /// Forwarded feature-map failure (embedding, domain check, sampling).
    #[error(transparent)]
    Feature(#[from] FeatureError),

    /// Forwarded solver failure from a finite-difference re-solve.
    #[error(transparent)]
    Solver(#[from] SolverError),

    /// Forwarded core failure (operator construction, measure validation).
    #[error(transparent)]
    Core(#[from] CoreError),
}
