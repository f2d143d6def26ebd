//! Deterministic dense kernels for dot products, scaled accumulation, and
//! summation.
//!
//! Every routine here uses a fixed association order that does not depend on
//! thread count or chunk scheduling, so repeated runs on the same build give
//! bit-identical floating point results. The dot product keeps eight
//! independent partial sums to expose instruction-level parallelism; the
//! summation uses a pairwise tree, which keeps rounding error at
//! O(log n) * ulp instead of O(n) * ulp for long accumulations.

/// Dot product with eight-way partial sums combined in a fixed order.
///
/// # Panics
/// Panics if the slices have different lengths.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for k in 0..chunks {
        let base = k * 8;
        for lane in 0..8 {
            acc[lane] += a[base + lane] * b[base + lane];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    let front = (acc[0] + acc[4]) + (acc[1] + acc[5]);
    let back = (acc[2] + acc[6]) + (acc[3] + acc[7]);
    (front + back) + tail
}

/// In-place scaled accumulation y += alpha * x.
///
/// # Panics
/// Panics if the slices have different lengths.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy: length mismatch");
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * xi;
    }
}

/// Pairwise (tree) summation with a fixed split point.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        let mut s = 0.0;
        for &xi in x {
            s += xi;
        }
        return s;
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Sum of |x_i| via the pairwise tree, used for l1 residuals.
pub fn pairwise_abs_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        let mut s = 0.0;
        for &xi in x {
            s += xi.abs();
        }
        return s;
    }
    let mid = x.len() / 2;
    pairwise_abs_sum(&x[..mid]) + pairwise_abs_sum(&x[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive_on_small_inputs() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.7).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() <= 1e-12 * naive.abs().max(1.0));
    }

    #[test]
    fn dot_is_deterministic_across_calls() {
        let a: Vec<f64> = (0..1001).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let b: Vec<f64> = (0..1001).map(|i| (i as f64).sqrt()).collect();
        let first = dot(&a, &b);
        for _ in 0..5 {
            assert_eq!(dot(&a, &b).to_bits(), first.to_bits());
        }
    }

    #[test]
    fn axpy_accumulates_in_place() {
        let x = [1.0, 2.0, 3.0];
        let mut y = [10.0, 20.0, 30.0];
        axpy(0.5, &x, &mut y);
        assert_eq!(y, [10.5, 21.0, 31.5]);
    }

    #[test]
    fn pairwise_sum_handles_empty_and_long_inputs() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        let x = vec![0.1f64; 1_000];
        assert!((pairwise_sum(&x) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn abs_sum_ignores_sign() {
        assert_eq!(pairwise_abs_sum(&[-1.0, 2.0, -3.0]), 6.0);
    }
}
