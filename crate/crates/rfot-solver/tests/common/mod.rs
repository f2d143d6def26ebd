//! Shared helpers for solver integration tests: an independent
//! log-domain reference solver and a small deterministic instance
//! generator.

use ndarray::{Array1, Array2};

/// Numerically safe log of a sum of exponentials.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Reference dual value computed entirely in the log domain, with
/// potentials f, g instead of scaling vectors:
///
///   g_j = eps ln b_j - eps LSE_i( (f_i - C_ij) / eps )
///   f_i = eps ln a_j - eps LSE_j( (g_j - C_ij) / eps )
///
/// and value a . f + b . g. This shares no arithmetic with the scaling
/// implementation (no u, v vectors, no kernel entries) and is immune to
/// overflow, so it serves as an oracle at any regularization strength.
pub fn reference_dual_value(
    cost: &Array2<f64>,
    a: &Array1<f64>,
    b: &Array1<f64>,
    eps: f64,
    max_sweeps: usize,
) -> f64 {
    let (n, m) = cost.dim();
    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut scratch = vec![0.0f64; n.max(m)];
    for _ in 0..max_sweeps {
        let mut change = 0.0f64;
        for j in 0..m {
            for i in 0..n {
                scratch[i] = (f[i] - cost[(i, j)]) / eps;
            }
            let new = eps * b[j].ln() - eps * logsumexp(&scratch[..n]);
            change = change.max((new - g[j]).abs());
            g[j] = new;
        }
        for i in 0..n {
            for j in 0..m {
                scratch[j] = (g[j] - cost[(i, j)]) / eps;
            }
            let new = eps * a[i].ln() - eps * logsumexp(&scratch[..m]);
            change = change.max((new - f[i]).abs());
            f[i] = new;
        }
        if change < 1e-15 {
            break;
        }
    }
    let fa: f64 = f.iter().zip(a.iter()).map(|(&fi, &ai)| fi * ai).sum();
    let gb: f64 = g.iter().zip(b.iter()).map(|(&gj, &bj)| gj * bj).sum();
    fa + gb
}

/// Small deterministic generator so instances are reproducible without
/// an external RNG dependency.
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

    /// Uniform draw from [lo, hi).
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn next_usize(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.next_u64() as usize) % (hi_inclusive - lo + 1)
    }

    /// Random positive weights summing to one.
    pub fn weights(&mut self, n: usize) -> Array1<f64> {
        let mut w = Array1::from_shape_fn(n, |_| self.next_in(0.1, 1.0));
        let sum = w.sum();
        w.mapv_inplace(|x| x / sum);
        w
    }

    /// Random cost matrix with entries in [0, spread).
    pub fn cost(&mut self, n: usize, m: usize, spread: f64) -> Array2<f64> {
        Array2::from_shape_fn((n, m), |_| self.next_in(0.0, spread))
    }
}
