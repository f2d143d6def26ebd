//! Synthetic benchmark datasets.
//!
//! Both generators draw from counter-based streams, so a dataset is a
//! pure function of its size and seed: regenerating with the same
//! arguments reproduces every coordinate bit for bit, on any platform,
//! regardless of how many points were drawn before.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use ndarray::Array2;
use rfot_core::DiscreteMeasure;
use rfot_features::{CounterRng, STREAM_DATASET};

/// Two planar Gaussian clouds with uniform weights.
///
/// The source cloud is drawn from a centered normal with covariance
/// 0.1 I; the target cloud from a normal with mean (1, 1) and identity
/// covariance, then divided by its own largest norm so it lives in the
/// unit ball. The source cloud keeps its raw scale: its points almost
/// always stay inside the unit ball but are not clamped, so feature
/// radii should be taken from [`DiscreteMeasure::max_norm`] of both
/// clouds rather than assumed to be 1.
///
/// # Errors
/// Rejects `n = 0`.
pub fn gen_gaussians(n: usize, seed: u64) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let rng = CounterRng::new(STREAM_DATASET, seed);
    let spread = 0.1f64.sqrt();
    let mut source = Array2::zeros((n, 2));
    let mut target = Array2::zeros((n, 2));
    for i in 0..n {
        let idx = i as u64;
        source[[i, 0]] = spread * rng.normal(idx, 0);
        source[[i, 1]] = spread * rng.normal(idx, 1);
        target[[i, 0]] = 1.0 + rng.normal(idx, 2);
        target[[i, 1]] = 1.0 + rng.normal(idx, 3);
    }
    let max_norm = target
        .rows()
        .into_iter()
        .map(|p| p[0].hypot(p[1]))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    target.mapv_inplace(|c| c / max_norm);
    Ok((
        DiscreteMeasure::uniform(source)?,
        DiscreteMeasure::uniform(target)?,
    ))
}

/// Two clouds drawn uniformly from spherical caps on the unit sphere in
/// three dimensions, with uniform weights.
///
/// Each cap has angular radius `alpha` radians; the source cap is
/// centered on the north pole and the target cap on the diagonal axis
/// (1, 1, 1) normalized. Uniformity on a cap follows from the area
/// element of the sphere: the height above the cap base is uniform on
/// [cos alpha, 1] and the azimuth is uniform on the circle.
///
/// # Errors
/// Rejects `n = 0` and `alpha` outside (0, pi].
pub fn gen_sphere_caps(
    n: usize,
    alpha: f64,
    seed: u64,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    ensure!(
        alpha.is_finite() && alpha > 0.0 && alpha <= std::f64::consts::PI,
        "cap radius must lie in (0, pi], got {alpha}"
    );
    let rng = CounterRng::new(STREAM_DATASET, seed);
    let source_axis = [0.0, 0.0, 1.0];
    let inv_sqrt3 = 1.0 / 3f64.sqrt();
    let target_axis = [inv_sqrt3, inv_sqrt3, inv_sqrt3];
    let source = cap_cloud(&rng, n, alpha, source_axis, 0)?;
    let target = cap_cloud(&rng, n, alpha, target_axis, 10)?;
    Ok((
        DiscreteMeasure::uniform(source)?,
        DiscreteMeasure::uniform(target)?,
    ))
}

/// Samples `n` points uniformly from the cap of angular radius `alpha`
/// around `axis`, using coordinate tags offset by `tag` to keep the two
/// clouds on disjoint parts of the stream.
fn cap_cloud(
    rng: &CounterRng,
    n: usize,
    alpha: f64,
    axis: [f64; 3],
    tag: u64,
) -> Result<Array2<f64>> {
    let (t1, t2) = orthonormal_tangents(axis);
    let z_min = alpha.cos();
    let mut points = Array2::zeros((n, 3));
    for i in 0..n {
        let idx = i as u64;
        let z = z_min + (1.0 - z_min) * rng.uniform(idx, tag, 0);
        let azimuth = std::f64::consts::TAU * rng.uniform(idx, tag + 1, 0);
        let ring = (1.0 - z * z).max(0.0).sqrt();
        let (s, c) = azimuth.sin_cos();
        for k in 0..3 {
            points[[i, k]] = ring * (c * t1[k] + s * t2[k]) + z * axis[k];
        }
    }
    Ok(points)
}

/// Reads a measure from a file, dispatching on the extension: `.json`
/// uses the JSON layout, anything else the CSV layout.
///
/// # Errors
/// File system and parse failures, annotated with the path.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let measure = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => DiscreteMeasure::read_json(path),
        _ => DiscreteMeasure::read_csv(path),
    };
    measure.with_context(|| format!("reading measure from {}", path.display()))
}

/// Writes a measure to a file, dispatching on the extension like
/// [`read_measure`].
///
/// # Errors
/// File system failures, annotated with the path.
pub fn write_measure(measure: &DiscreteMeasure, path: &Path) -> Result<()> {
    let outcome = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => measure.write_json(path),
        _ => measure.write_csv(path),
    };
    outcome.with_context(|| format!("writing measure to {}", path.display()))
}

/// Completes a unit axis to an orthonormal frame of the sphere's
/// tangent plane at that axis.
fn orthonormal_tangents(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if axis[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut t1 = [
        helper[1] * axis[2] - helper[2] * axis[1],
        helper[2] * axis[0] - helper[0] * axis[2],
        helper[0] * axis[1] - helper[1] * axis[0],
    ];
    let norm = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
    for c in &mut t1 {
        *c /= norm;
    }
    let t2 = [
        axis[1] * t1[2] - axis[2] * t1[1],
        axis[2] * t1[0] - axis[0] * t1[2],
        axis[0] * t1[1] - axis[1] * t1[0],
    ];
    (t1, t2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_cloud_lives_in_the_unit_ball() {
        let (_, target) = gen_gaussians(500, 7).unwrap();
        assert!(target.max_norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let (a1, b1) = gen_gaussians(64, 3).unwrap();
        let (a2, b2) = gen_gaussians(64, 3).unwrap();
        assert_eq!(a1.points(), a2.points());
        assert_eq!(b1.points(), b2.points());
        let (a3, _) = gen_gaussians(64, 4).unwrap();
        assert_ne!(a1.points(), a3.points());
    }

    #[test]
    fn source_cloud_mean_concentrates_at_the_origin() {
        let n = 4000;
        let (source, _) = gen_gaussians(n, 11).unwrap();
        let bound = 3.0 * (0.1 / n as f64).sqrt();
        for c in 0..2 {
            let mean = source.points().column(c).sum() / n as f64;
            assert!(
                mean.abs() <= bound,
                "component {c} mean {mean} exceeds CLT bound {bound}"
            );
        }
    }

    #[test]
    fn sphere_points_sit_on_the_unit_sphere_inside_their_caps() {
        let alpha = 0.4;
        let (mu, nu) = gen_sphere_caps(200, alpha, 5).unwrap();
        let axes = [[0.0, 0.0, 1.0], [1.0 / 3f64.sqrt(); 3]];
        for (measure, axis) in [(&mu, axes[0]), (&nu, axes[1])] {
            for p in measure.points().rows() {
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                let dot = p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2];
                assert!(dot >= alpha.cos() - 1e-12);
            }
        }
    }

    #[test]
    fn invalid_cap_radius_is_rejected() {
        assert!(gen_sphere_caps(10, 0.0, 0).is_err());
        assert!(gen_sphere_caps(10, 4.0, 0).is_err());
    }
}
