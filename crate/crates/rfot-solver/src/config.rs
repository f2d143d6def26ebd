//! Solver configuration and run reports.

use rfot_core::DualPotentials;
use serde::Serialize;

use crate::error::SolverError;

/// Default L1 marginal residual below which a run counts as converged.
pub const DEFAULT_MARGINAL_TOL: f64 = 1e-9;

/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Default magnitude at which a scaling vector is renormalized into its
/// log offset. Large enough that well-conditioned runs never touch it,
/// small enough to leave two hundred orders of magnitude of headroom
/// before f64 overflow.
pub const DEFAULT_STABILIZATION_THRESHOLD: f64 = 1e100;

/// Default number of iterations between convergence checks.
pub const DEFAULT_CHECK_EVERY: usize = 10;

/// Knobs shared by both solvers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveConfig {
    /// Convergence threshold on the L1 distance between the column
    /// marginal of the current scaling pair and the target weights.
    pub marginal_tol: f64,
    /// Hard cap on the number of iterations.
    pub max_iters: usize,
    /// When the largest entry of a scaling vector exceeds this value (or
    /// drops below its reciprocal), the vector is divided by that entry
    /// and the logarithm is moved into the corresponding offset.
    pub stabilization_threshold: f64,
    /// Convergence is tested every this many iterations; residual
    /// evaluation reuses the products the iteration computes anyway, so
    /// small values cost little.
    pub check_every: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            marginal_tol: DEFAULT_MARGINAL_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            stabilization_threshold: DEFAULT_STABILIZATION_THRESHOLD,
            check_every: DEFAULT_CHECK_EVERY,
        }
    }
}

impl SolveConfig {
    /// Checks that every knob is in its valid range.
    pub fn validate(&self) -> Result<(), SolverError> {
        if !self.marginal_tol.is_finite() || self.marginal_tol <= 0.0 {
            return Err(SolverError::InvalidConfig(
                "marginal_tol must be finite and positive",
            ));
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be at least 1"));
        }
        if !self.stabilization_threshold.is_finite() || self.stabilization_threshold <= 1.0 {
            return Err(SolverError::InvalidConfig(
                "stabilization_threshold must be finite and greater than 1",
            ));
        }
        if self.check_every == 0 {
            return Err(SolverError::InvalidConfig("check_every must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of a solver run.
///
/// When `converged` is false the report still carries the iterate with
/// the smallest residual seen, so callers can judge how close the run
/// got and decide whether to retry with a larger budget.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Scaling vectors and their log offsets at the reported iterate.
    pub potentials: DualPotentials,
    /// Dual objective value at the reported iterate.
    pub w_hat: f64,
    /// Number of iterations executed.
    pub iters: usize,
    /// L1 marginal residual at the reported iterate.
    pub marginal_residual: f64,
    /// Wall-clock time of the solve in seconds.
    pub wall_time: f64,
    /// Number of rescaling events that moved magnitude into the offsets.
    pub stabilizations: usize,
    /// Whether the residual dropped below `marginal_tol`.
    pub converged: bool,
}

#[derive(Serialize)]
struct ReportDto<'a> {
    w_hat: f64,
    iters: usize,
    marginal_residual: f64,
    wall_time_s: f64,
    stabilizations: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    u: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_offset_u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_offset_v: Option<f64>,
}

impl SolveReport {
    /// Serializes the report to JSON, optionally including the scaling
    /// vectors themselves (they can be large).
    pub fn to_json(&self, include_potentials: bool) -> serde_json::Value {
        let dto = ReportDto {
            w_hat: self.w_hat,
            iters: self.iters,
            marginal_residual: self.marginal_residual,
            wall_time_s: self.wall_time,
            stabilizations: self.stabilizations,
            converged: self.converged,
            u: include_potentials.then(|| self.potentials.u.as_slice().expect("contiguous")),
            v: include_potentials.then(|| self.potentials.v.as_slice().expect("contiguous")),
            log_offset_u: include_potentials.then_some(self.potentials.log_offset_u),
            log_offset_v: include_potentials.then_some(self.potentials.log_offset_v),
        };
        serde_json::to_value(dto).expect("report serialization cannot fail")
    }
}
