//! Solvers for entropically regularized transport on discrete measures.
//!
//! Both solvers consume a [`rfot_core::KernelOperator`], so they run
//! unchanged on dense kernels and on factorized low-rank ones; only the
//! cost of each matrix-vector product differs. [`sinkhorn`] is the
//! classical alternating scaling iteration with overflow protection by
//! gauge rescaling, and [`accelerated_sinkhorn`] is an adaptive
//! momentum scheme on the dual objective with exact block updates.
//! Shared helpers materialize transport plans, combine solves into a
//! debiased divergence, and sanity-check potential ranges.

#![forbid(unsafe_code)]

mod accelerated;
mod config;
mod diagnostics;
mod divergence;
mod error;
mod plan;
mod sinkhorn;

pub use accelerated::{accelerated_sinkhorn, accelerated_sinkhorn_with_plan};
pub use config::{
    SolveConfig, SolveReport, DEFAULT_CHECK_EVERY, DEFAULT_MARGINAL_TOL, DEFAULT_MAX_ITERS,
    DEFAULT_STABILIZATION_THRESHOLD,
};
pub use diagnostics::{potential_range_check, KernelStats, RangeDiagnostic};
pub use divergence::sinkhorn_divergence;
pub use error::SolverError;
pub use plan::plan;
pub use sinkhorn::{evaluate_dual, sinkhorn};

/// Crate-wide result alias.
pub type Result<T, E = SolverError> = std::result::Result<T, E>;
