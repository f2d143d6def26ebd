//! Finite-difference oracles for every analytic gradient.
//!
//! The difference quotients re-solve perturbed problems through the public
//! solver only, so they know nothing about the gradient formulas they
//! judge.

mod common;

use common::{random_measure, tight, Lcg};
use ndarray::{Array1, Array2};
use rfot_core::KernelOperator;
use rfot_features::{sample_features, FeatureMapSpec, SampledFeatures};
use rfot_grad::{
    divergence_location_grad, fd_check_features, fd_check_kernel, fd_check_locations,
    kernel_direction_order,
};
use rfot_core::DiscreteMeasure;
use rfot_solver::sinkhorn;

fn frozen_kernel_instance() -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let mut rng = Lcg(0x5eed_0001);
    let matrix = Array2::from_shape_fn((3, 3), |_| rng.next_in(0.15, 1.2));
    let a = common::simplex_weights(&mut rng, 3);
    let b = common::simplex_weights(&mut rng, 3);
    (matrix, a, b)
}

fn feature_instance() -> (SampledFeatures, DiscreteMeasure, DiscreteMeasure) {
    let mut rng = Lcg(0x5eed_0002);
    let spec = FeatureMapSpec::gaussian(0.8, 1.0, 2).unwrap();
    let features = sample_features(&spec, 3, 42).unwrap();
    let mu = random_measure(&mut rng, 4, 2, 0.55);
    let nu = random_measure(&mut rng, 4, 2, 0.55);
    (features, mu, nu)
}

#[test]
fn kernel_gradient_matches_finite_differences_on_three_by_three() {
    let (matrix, a, b) = frozen_kernel_instance();
    let report = fd_check_kernel(matrix.view(), a.view(), b.view(), 0.6, &tight()).unwrap();
    let err = report.fd_max_rel_err.unwrap();
    assert!(err <= 1e-4, "kernel gradient fd mismatch: {err:.3e}");

    let json = report.to_json();
    assert!(json["fd_max_rel_err"].as_f64().unwrap() <= 1e-4);
    assert_eq!(json["shape"][0], 3);
}

#[test]
fn location_gradients_match_finite_differences() {
    let (features, mu, nu) = feature_instance();
    let grads = fd_check_locations(&features, &mu, &nu, &tight()).unwrap();
    let err_x = grads.wrt_x.fd_max_rel_err.unwrap();
    let err_y = grads.wrt_y.fd_max_rel_err.unwrap();
    assert!(err_x <= 1e-3, "source-side fd mismatch: {err_x:.3e}");
    assert!(err_y <= 1e-3, "target-side fd mismatch: {err_y:.3e}");
}

#[test]
fn feature_gradient_matches_finite_differences() {
    let (features, mu, nu) = feature_instance();
    let report = fd_check_features(&features, &mu, &nu, &tight()).unwrap();
    let err = report.fd_max_rel_err.unwrap();
    assert!(err <= 1e-3, "feature gradient fd mismatch: {err:.3e}");
}

#[test]
fn directional_quotient_converges_at_second_order() {
    let (matrix, a, b) = frozen_kernel_instance();
    let mut rng = Lcg(0x5eed_0003);
    let direction = Array2::from_shape_fn((3, 3), |_| rng.next_in(-1.0, 1.0));
    let order = kernel_direction_order(
        matrix.view(),
        a.view(),
        b.view(),
        0.6,
        direction.view(),
        2e-3,
        &tight(),
    )
    .unwrap();
    assert!(
        (1.9..=2.6).contains(&order),
        "observed convergence order {order:.3}"
    );
}

#[test]
fn divergence_gradient_sits_at_the_noise_floor_for_equal_measures() {
    let (features, mu, _) = feature_instance();

    let analytic = divergence_location_grad(&features, &mu, &mu, &tight()).unwrap();

    // Independent probe: difference quotients of the debiased divergence
    // value itself over every source coordinate.
    let epsilon = features.spec().epsilon();
    let weights = mu.weights().to_owned();
    let divergence_at = |points: Array2<f64>| -> f64 {
        let probe = DiscreteMeasure::new(points, weights.clone()).unwrap();
        let solve = |p: &DiscreteMeasure, q: &DiscreteMeasure| -> f64 {
            let xi = features.embed(p).unwrap();
            let zeta = features.embed(q).unwrap();
            let kernel = KernelOperator::factorized(xi, zeta).unwrap();
            sinkhorn(
                &kernel,
                &p.weights().to_owned(),
                &q.weights().to_owned(),
                epsilon,
                &tight(),
            )
            .unwrap()
            .w_hat
        };
        solve(&probe, &mu) - 0.5 * solve(&probe, &probe) - 0.5 * solve(&mu, &mu)
    };

    let x0 = mu.points().to_owned();
    let mut fd_floor = 0.0f64;
    for k in 0..x0.nrows() {
        for c in 0..x0.ncols() {
            let h = rfot_grad::fd_step(x0[[k, c]]);
            let mut plus = x0.clone();
            plus[[k, c]] += h;
            let mut minus = x0.clone();
            minus[[k, c]] -= h;
            let quotient = (divergence_at(plus) - divergence_at(minus)) / (2.0 * h);
            fd_floor = fd_floor.max(quotient.abs());
        }
    }

    assert!(
        analytic.max_abs() <= fd_floor.max(1e-10),
        "analytic divergence gradient {:.3e} exceeds the fd noise floor {:.3e}",
        analytic.max_abs(),
        fd_floor
    );
    assert!(
        fd_floor <= 1e-3,
        "fd probe of a stationary point should be near zero, got {fd_floor:.3e}"
    );
}
