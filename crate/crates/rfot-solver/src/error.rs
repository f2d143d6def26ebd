//! Error types for the scaling solvers.

use thiserror::Error;

/// Failures raised by the solvers in this crate.
///
/// Reaching the iteration cap is not an error: `sinkhorn` and
/// `accelerated_sinkhorn` return their best iterate with
/// `converged = false` so callers can inspect how far the run got.
#[derive(Debug, Error)]
pub enum SolverError {
    /// Invalid entries in the solver configuration.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),

    /// Marginal vector length does not match the kernel shape.
    #[error("{side} marginal has length {got}, kernel expects {expected}")]
    MarginalLength {
        side: &'static str,
        expected: usize,
        got: usize,
    },

    /// A dense kernel with exact zero entries cannot be scaled reliably;
    /// a zero row or column makes the scaling iteration divide by zero,
    /// and isolated zeros void the positivity the convergence theory needs.
    #[error(
        "dense kernel has {count} exact zero entries; \
         increase epsilon or use a factorized kernel"
    )]
    ZeroKernelEntries { count: usize },

    /// A scaling vector or matrix-vector product stopped being finite
    /// and positive, so subsequent iterates would be meaningless.
    #[error("numerical breakdown at iteration {iter}: {what}")]
    NumericalBreakdown { iter: usize, what: &'static str },

    /// The backtracking search in the accelerated solver kept rejecting
    /// steps until the local smoothness estimate exceeded its cap.
    #[error(
        "line search stalled at iteration {iter}: \
         smoothness estimate {l_estimate:.3e} exceeds cap {cap:.3e}"
    )]
    LineSearchStall {
        iter: usize,
        l_estimate: f64,
        cap: f64,
    },

    /// Materializing the transport plan would allocate more entries than
    /// the caller-provided cap allows.
    #[error("plan with {rows}x{cols} entries exceeds materialization cap {cap}")]
    PlanTooLarge {
        rows: usize,
        cols: usize,
        cap: usize,
    },

    /// One of the three solves inside the divergence did not converge,
    /// so the debiased combination would be meaningless.
    #[error("divergence solve for the {leg} pair stopped at residual {residual:.3e} without converging")]
    DivergenceNotConverged { leg: &'static str, residual: f64 },

    /// One of the three solves inside the divergence failed outright.
    #[error("divergence solve for the {leg} pair failed")]
    DivergenceSolve {
        leg: &'static str,
        #[source]
        source: Box<SolverError>,
    },

    /// Kernel construction for one of the divergence pairs failed.
    #[error("kernel construction for the {leg} pair failed")]
    DivergenceKernel {
        leg: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    /// Invalid input from the core layer (measures, kernels, costs).
    #[error(transparent)]
    Core(#[from] rfot_core::CoreError),
}
