//! Scaling vectors (u, v) with accumulated log offsets.
//!
//! Scaling solvers work with u and v such that the primal plan is
//! P = diag(u) K diag(v). When iterates threaten to overflow, a solver
//! divides u or v by a positive constant T and adds log T to the matching
//! offset, so the effective dual potentials
//!
//!   alpha = eps * (log u + log_offset_u),
//!   beta  = eps * (log v + log_offset_v)
//!
//! are unchanged by the rescaling.

use ndarray::Array1;

/// Dual scaling pair with rescaling bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub log_offset_u: f64,
    pub log_offset_v: f64,
}

impl DualPotentials {
    /// All-ones scalings with zero offsets, the standard initialization.
    pub fn ones(n: usize, m: usize) -> Self {
        Self {
            u: Array1::from_elem(n, 1.0),
            v: Array1::from_elem(m, 1.0),
            log_offset_u: 0.0,
            log_offset_v: 0.0,
        }
    }

    /// Effective dual potential alpha_i = eps * (log u_i + log_offset_u).
    pub fn alpha(&self, epsilon: f64) -> Array1<f64> {
        self.u.mapv(|ui| epsilon * (ui.ln() + self.log_offset_u))
    }

    /// Effective dual potential beta_j = eps * (log v_j + log_offset_v).
    pub fn beta(&self, epsilon: f64) -> Array1<f64> {
        self.v.mapv(|vj| epsilon * (vj.ln() + self.log_offset_v))
    }

    /// Divides u by `t` and adds log t to the u offset.
    ///
    /// # Panics
    /// Panics when `t` is not strictly positive and finite, since that would
    /// corrupt the potentials silently.
    pub fn rescale_u(&mut self, t: f64) {
        assert!(t.is_finite() && t > 0.0, "rescale_u needs t > 0, got {t}");
        self.u.mapv_inplace(|ui| ui / t);
        self.log_offset_u += t.ln();
    }

    /// Divides v by `t` and adds log t to the v offset.
    ///
    /// # Panics
    /// Panics when `t` is not strictly positive and finite.
    pub fn rescale_v(&mut self, t: f64) {
        assert!(t.is_finite() && t > 0.0, "rescale_v needs t > 0, got {t}");
        self.v.mapv_inplace(|vj| vj / t);
        self.log_offset_v += t.ln();
    }

    /// True when every effective potential entry is finite.
    pub fn is_finite(&self) -> bool {
        let u_ok = self
            .u
            .iter()
            .all(|&ui| (ui.ln() + self.log_offset_u).is_finite());
        let v_ok = self
            .v
            .iter()
            .all(|&vj| (vj.ln() + self.log_offset_v).is_finite());
        u_ok && v_ok
    }
}
