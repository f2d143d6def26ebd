//! Declarative benchmark sweeps.
//!
//! An [`ExperimentSpec`] is plain data: it names a dataset, the grid of
//! regularizations, feature counts, seeds, and methods, and the two
//! solve tolerances. Validation enforces the schema rules once so the
//! runner can trust every cell it expands.

use anyhow::{bail, ensure, Result};
use serde::{Deserialize, Serialize};

/// Which dataset a benchmark runs on.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// Two planar Gaussian clouds (see [`crate::dataset::gen_gaussians`]).
    Gaussians2d { n: usize },
    /// Spherical-cap clouds on the unit sphere in three dimensions.
    SphereCaps { n: usize, alpha: f64 },
    /// User-supplied measures read from files (csv or json by extension).
    Files { mu: String, nu: String },
}

/// Solver selection for one benchmark cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DenseSinkhorn,
    RfSinkhorn,
    RfAccelerated,
}

impl Method {
    /// Label written to the CSV method column.
    pub fn label(self) -> &'static str {
        match self {
            Method::DenseSinkhorn => "dense_sinkhorn",
            Method::RfSinkhorn => "rf_sinkhorn",
            Method::RfAccelerated => "rf_accelerated",
        }
    }

    /// Whether the method solves on a sampled factorized kernel.
    pub fn is_factorized(self) -> bool {
        !matches!(self, Method::DenseSinkhorn)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense_sinkhorn" => Ok(Method::DenseSinkhorn),
            "rf_sinkhorn" => Ok(Method::RfSinkhorn),
            "rf_accelerated" => Ok(Method::RfAccelerated),
            other => bail!(
                "unknown method {other:?} (expected dense_sinkhorn, rf_sinkhorn, \
                 or rf_accelerated)"
            ),
        }
    }
}

fn default_ground_truth_tol() -> f64 {
    1e-8
}

fn default_bench_tol() -> f64 {
    1e-6
}

fn default_max_iters() -> usize {
    50_000
}

/// Full description of a benchmark sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub dataset: DatasetSpec,
    /// Regularization strengths; ground truth is computed once per entry.
    pub epsilons: Vec<f64>,
    /// Feature counts for the factorized methods (dense cells ignore them).
    pub r_values: Vec<usize>,
    /// Seeds replicating each cell; they drive the feature draws.
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Marginal tolerance of the dense ground-truth solves.
    #[serde(default = "default_ground_truth_tol")]
    pub ground_truth_tol: f64,
    /// Marginal tolerance of every benchmarked cell.
    #[serde(default = "default_bench_tol")]
    pub bench_tol: f64,
    /// Iteration cap shared by every solve in the sweep.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Seed of the synthetic dataset, independent of the cell seeds.
    #[serde(default)]
    pub dataset_seed: u64,
}

impl ExperimentSpec {
    /// Checks grid non-emptiness, positivity, and the tolerance ordering.
    ///
    /// # Errors
    /// Describes the first violated rule.
    pub fn validate(&self) -> Result<()> {
        ensure!(!self.epsilons.is_empty(), "epsilons must be nonempty");
        ensure!(!self.seeds.is_empty(), "seeds must be nonempty");
        ensure!(!self.methods.is_empty(), "methods must be nonempty");
        for &eps in &self.epsilons {
            ensure!(
                eps.is_finite() && eps > 0.0,
                "epsilon must be positive, got {eps}"
            );
        }
        if self.methods.iter().any(|m| m.is_factorized()) {
            ensure!(
                !self.r_values.is_empty(),
                "r_values must be nonempty when a factorized method is requested"
            );
        }
        for &r in &self.r_values {
            ensure!(r >= 1, "feature counts must be at least 1");
        }
        match &self.dataset {
            DatasetSpec::Gaussians2d { n } | DatasetSpec::SphereCaps { n, .. } => {
                ensure!(*n >= 1, "dataset size must be at least 1");
            }
            DatasetSpec::Files { .. } => {}
        }
        ensure!(
            self.ground_truth_tol > 0.0 && self.bench_tol > 0.0,
            "tolerances must be positive"
        );
        ensure!(
            self.ground_truth_tol * 10.0 <= self.bench_tol,
            "ground truth tolerance {} must be at least 10x tighter than the \
             benchmark tolerance {}",
            self.ground_truth_tol,
            self.bench_tol
        );
        ensure!(self.max_iters >= 1, "max_iters must be at least 1");
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        ExperimentSpec {
            dataset: DatasetSpec::Gaussians2d { n: 16 },
            epsilons: vec![0.5],
            r_values: vec![8],
            seeds: vec![0, 1],
            methods: vec![Method::DenseSinkhorn, Method::RfSinkhorn],
            ground_truth_tol: 1e-9,
            bench_tol: 1e-7,
            max_iters: 10_000,
            dataset_seed: 0,
        }
    }

    #[test]
    fn valid_spec_passes() {
        small_spec().validate().unwrap();
    }

    #[test]
    fn tolerance_ordering_is_enforced() {
        let mut spec = small_spec();
        spec.ground_truth_tol = 1e-7;
        assert!(spec.validate().is_err());
        spec.ground_truth_tol = 1e-8;
        spec.validate().unwrap();
    }

    #[test]
    fn factorized_methods_require_feature_counts() {
        let mut spec = small_spec();
        spec.r_values.clear();
        assert!(spec.validate().is_err());
        spec.methods = vec![Method::DenseSinkhorn];
        spec.validate().unwrap();
    }

    #[test]
    fn method_labels_round_trip_through_parsing() {
        for method in [
            Method::DenseSinkhorn,
            Method::RfSinkhorn,
            Method::RfAccelerated,
        ] {
            let parsed: Method = method.label().parse().unwrap();
            assert_eq!(parsed, method);
        }
        assert!("nystrom".parse::<Method>().is_err());
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = small_spec();
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"rf_sinkhorn\""));
        assert!(text.contains("\"gaussians2d\""));
        let back: ExperimentSpec = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.seeds, spec.seeds);
    }
}
