//! Monte-Carlo oracles for the perturbed arc-cosine map: the sample mean of
//! phi(x,u)^T phi(y,u) must estimate k_s(x,y) + kappa, feature dot products
//! must never fall below kappa, and the numerically maximized tail constant
//! must dominate a large random sample of ratios.

use ndarray::arr1;
use rfot_features::{
    arccos_feature, arccos_kernel, concentration_constants, sample_features, CounterRng,
    FeatureMapSpec,
};

fn test_spec(s: u32) -> FeatureMapSpec {
    FeatureMapSpec::arccos_perturbed(s, 0.1, 2.0, 0.5, 1.0, 2).unwrap()
}

#[test]
fn mc_mean_matches_closed_form_degree_one() {
    let spec = test_spec(1);
    let x = arr1(&[1.0, 0.0]);
    let y = arr1(&[0.0, 1.0]);
    let exact = arccos_kernel(x.view(), y.view(), 1).unwrap() + 0.1;
    let features = sample_features(&spec, 100_000, 3).unwrap();
    let estimate = features.kernel_estimate(x.view(), y.view()).unwrap();
    let rel_err = (estimate / exact - 1.0).abs();
    assert!(rel_err <= 0.01, "relative error {rel_err} above 1%");
}

#[test]
fn mc_mean_matches_closed_form_degree_zero() {
    let spec = test_spec(0);
    let x = arr1(&[0.8, 0.1]);
    let y = arr1(&[-0.3, 0.6]);
    let exact = arccos_kernel(x.view(), y.view(), 0).unwrap() + 0.1;
    let features = sample_features(&spec, 100_000, 3).unwrap();
    let estimate = features.kernel_estimate(x.view(), y.view()).unwrap();
    let rel_err = (estimate / exact - 1.0).abs();
    assert!(rel_err <= 0.02, "relative error {rel_err} above 2%");
}

#[test]
fn embedding_dots_never_fall_below_kappa() {
    let spec = test_spec(1);
    let features = sample_features(&spec, 50, 11).unwrap();
    let pairs = [
        ([1.0, 0.0], [-1.0, 0.0]),
        ([0.5, 0.5], [-0.5, -0.5]),
        ([0.9, -0.1], [0.0, 0.0]),
    ];
    for (xv, yv) in pairs {
        let x = arr1(&xv);
        let y = arr1(&yv);
        let estimate = features.kernel_estimate(x.view(), y.view()).unwrap();
        assert!(
            estimate >= 0.1 * (1.0 - 1e-12),
            "dot {estimate} fell below kappa"
        );
    }
}

#[test]
fn numeric_tail_constant_dominates_random_ratios() {
    for s in [0u32, 1] {
        let spec = test_spec(s);
        let psi = concentration_constants(&spec).unwrap().psi;
        assert!(psi.is_finite() && psi > 0.0);
        let rng = CounterRng::new(101, 5);
        let mut empirical_max = 0.0f64;
        for i in 0..100_000u64 {
            let x = arr1(&[
                rng.uniform(i, 0, 0) * 1.2 - 0.6,
                rng.uniform(i, 1, 0) * 1.2 - 0.6,
            ]);
            let y = arr1(&[
                rng.uniform(i, 2, 0) * 1.2 - 0.6,
                rng.uniform(i, 3, 0) * 1.2 - 0.6,
            ]);
            let u = arr1(&[2.0 * rng.normal(i, 4), 2.0 * rng.normal(i, 5)]);
            let px = arccos_feature(x.view(), u.view(), &spec);
            let py = arccos_feature(y.view(), u.view(), &spec);
            let exact = arccos_kernel(x.view(), y.view(), s).unwrap() + 0.1;
            let ratio = (px[0] * py[0] + px[1] * py[1]) / exact;
            empirical_max = empirical_max.max(ratio);
        }
        assert!(
            psi >= empirical_max,
            "degree {s}: psi {psi} below empirical max {empirical_max}"
        );
    }
}
