//! Structural properties the gradients must satisfy regardless of
//! instance.

mod common;

use common::{random_measure, tight, Lcg};
use ndarray::Array2;
use rfot_core::{cost_matrix, gibbs_kernel, CostSpec, KernelOperator};
use rfot_features::{sample_features, FeatureMapSpec};
use rfot_grad::{grad_wrt_locations, grad_wrt_locations_squared_euclidean};
use rfot_solver::sinkhorn;
use std::time::Instant;

#[test]
fn rigid_translation_is_a_null_direction_of_the_squared_euclidean_gradient() {
    let mut rng = Lcg(0x5eed_0010);
    let mu = random_measure(&mut rng, 4, 2, 0.8);
    let nu = random_measure(&mut rng, 4, 2, 0.8);
    let epsilon = 0.5;
    let cost = cost_matrix(&mu, &nu, &CostSpec::squared_euclidean(epsilon).unwrap()).unwrap();
    let kernel = gibbs_kernel(cost.view(), epsilon).unwrap();
    let report = sinkhorn(
        &kernel,
        &mu.weights().to_owned(),
        &nu.weights().to_owned(),
        epsilon,
        &tight(),
    )
    .unwrap();

    let grads =
        grad_wrt_locations_squared_euclidean(&mu, &nu, &kernel, &report.potentials).unwrap();
    for c in 0..2 {
        let drift: f64 =
            grads.wrt_x.grad.column(c).sum() + grads.wrt_y.grad.column(c).sum();
        assert!(
            drift.abs() <= 1e-8,
            "translation component {c} drifts by {drift:.3e}"
        );
    }
}

#[test]
fn location_gradient_wall_time_grows_linearly_with_point_count() {
    let spec = FeatureMapSpec::gaussian(1.0, 1.0, 2).unwrap();
    let features = sample_features(&spec, 64, 5).unwrap();

    let timed = |count: usize| -> f64 {
        let mut rng = Lcg(0x5eed_0011 + count as u64);
        let mu = random_measure(&mut rng, count, 2, 0.6);
        let nu = random_measure(&mut rng, count, 2, 0.6);
        let xi = features.embed(&mu).unwrap();
        let zeta = features.embed(&nu).unwrap();
        let kernel = KernelOperator::factorized(xi, zeta).unwrap();
        let report = sinkhorn(
            &kernel,
            &mu.weights().to_owned(),
            &nu.weights().to_owned(),
            1.0,
            &tight(),
        )
        .unwrap();

        grad_wrt_locations(&features, &mu, &nu, &report.potentials).unwrap();
        let reps = 30;
        let start = Instant::now();
        for _ in 0..reps {
            let grads = grad_wrt_locations(&features, &mu, &nu, &report.potentials).unwrap();
            assert!(grads.wrt_x.grad.iter().all(|g| g.is_finite()));
        }
        start.elapsed().as_secs_f64() / reps as f64
    };

    let small = timed(400);
    let large = timed(1600);
    let ratio = large / small;
    assert!(
        ratio < 10.0,
        "4x points should cost about 4x, not {ratio:.1}x \
         ({small:.6}s vs {large:.6}s per call)"
    );
}

#[test]
fn feature_path_and_dense_path_use_the_same_envelope() {
    // The same factorized kernel differentiated as a dense matrix must
    // reproduce the feature-path location gradient through the chain rule:
    // contracting dW/dK against the analytic dK/dx of one coordinate.
    let mut rng = Lcg(0x5eed_0012);
    let spec = FeatureMapSpec::gaussian(0.8, 1.0, 2).unwrap();
    let features = sample_features(&spec, 5, 9).unwrap();
    let mu = random_measure(&mut rng, 3, 2, 0.55);
    let nu = random_measure(&mut rng, 3, 2, 0.55);

    let xi = features.embed(&mu).unwrap();
    let zeta = features.embed(&nu).unwrap();
    let factorized = KernelOperator::factorized(xi.clone(), zeta.clone()).unwrap();
    let report = sinkhorn(
        &factorized,
        &mu.weights().to_owned(),
        &nu.weights().to_owned(),
        0.8,
        &tight(),
    )
    .unwrap();
    let feature_path = grad_wrt_locations(&features, &mu, &nu, &report.potentials).unwrap();

    let dense = KernelOperator::dense(factorized.materialize()).unwrap();
    let kernel_grad = rfot_grad::grad_wrt_kernel(
        &dense,
        mu.weights(),
        nu.weights(),
        0.8,
        &report.potentials,
    )
    .unwrap();

    // dK_kl/dx_{k,c} = d/dx [xi_k . zeta_l]; only row k of xi moves.
    let eval = rfot_features::gaussian::GaussianEval::new(features.spec()).unwrap();
    let scale = 1.0 / (features.r() as f64).sqrt();
    let theta = features.theta().to_owned();
    let mut chained = Array2::<f64>::zeros((3, 2));
    for k in 0..3 {
        let x = mu.point(k).to_owned();
        let mut dphi = [0.0f64; 2];
        for (j, u) in theta.rows().into_iter().enumerate() {
            eval.eval_with_dx(
                x.as_slice().unwrap(),
                u.as_slice().unwrap(),
                &mut dphi,
            );
            for l in 0..3 {
                for c in 0..2 {
                    chained[[k, c]] +=
                        kernel_grad.grad[[k, l]] * scale * dphi[c] * zeta[[l, j]];
                }
            }
        }
    }

    let tol = 1e-10 * feature_path.wrt_x.max_abs().max(1.0);
    for (&a, &b) in feature_path.wrt_x.grad.iter().zip(chained.iter()) {
        let gap: f64 = a - b;
        assert!(gap.abs() <= tol, "chain rule mismatch: {a} vs {b}");
    }
}
