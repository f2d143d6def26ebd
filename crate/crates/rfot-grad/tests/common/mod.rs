//! Shared fixtures for the gradient integration tests.

use ndarray::{Array1, Array2};
use rfot_core::DiscreteMeasure;
use rfot_solver::SolveConfig;

/// Solver settings tight enough that finite-difference quotients are
/// limited by truncation error rather than solve error.
pub fn tight() -> SolveConfig {
    SolveConfig {
        marginal_tol: 1e-13,
        check_every: 1,
        max_iters: 200_000,
        ..SolveConfig::default()
    }
}

/// Small deterministic generator for frozen test instances.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Points with coordinates in [-half, half], keeping every norm safely
/// inside the Gaussian feature domain B(0, radius) even after probe steps.
pub fn box_points(rng: &mut Lcg, count: usize, dim: usize, half: f64) -> Array2<f64> {
    Array2::from_shape_fn((count, dim), |_| rng.next_in(-half, half))
}

/// Strictly positive weights summing to one.
pub fn simplex_weights(rng: &mut Lcg, count: usize) -> Array1<f64> {
    let raw = Array1::from_shape_fn(count, |_| rng.next_in(0.2, 1.0));
    let total = raw.sum();
    raw / total
}

/// A measure on random box points with random weights.
pub fn random_measure(rng: &mut Lcg, count: usize, dim: usize, half: f64) -> DiscreteMeasure {
    DiscreteMeasure::new(
        box_points(rng, count, dim, half),
        simplex_weights(rng, count),
    )
    .expect("generated weights are positive and normalized")
}
