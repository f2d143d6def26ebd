//! Shared helpers for the feature-map oracle tests.

use ndarray::Array2;

/// Deterministic, roughly uniform points in the disk of the given radius:
/// golden-angle spiral with a sqrt radial profile.
pub fn spiral_points(n: usize, radius: f64) -> Array2<f64> {
    let mut points = Array2::zeros((n, 2));
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        let rho = radius * t.sqrt();
        let angle = i as f64 * 2.399_963_229_728_653;
        points[[i, 0]] = rho * angle.cos();
        points[[i, 1]] = rho * angle.sin();
    }
    points
}
