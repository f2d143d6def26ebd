//! The `rfot` command line tool.
//!
//! Subcommands: `solve` one problem from measure files, `bench` a sweep
//! from a spec file or flags, `budget` the feature-count formula,
//! `gradcheck` the analytic gradients against finite differences, and
//! `gen` synthetic datasets. Exit codes: 0 success, 1 check failure,
//! 2 invalid input.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use ndarray::{Array1, Array2};
use serde_json::json;

use rfot_cli::bench::run_benchmark;
use rfot_cli::dataset::{gen_gaussians, gen_sphere_caps, read_measure, write_measure};
use rfot_cli::experiment::{DatasetSpec, ExperimentSpec, Method};
use rfot_cli::plot::scatter_svg;
use rfot_core::{cost_matrix, gibbs_kernel, CostSpec, DiscreteMeasure, KernelOperator};
use rfot_features::{
    concentration_constants, sample_features, CounterRng, FeatureMapSpec, SampledFeatures,
    DEFAULT_BUDGET_CONSTANT, STREAM_DATASET,
};
use rfot_grad::{
    fd_feature_quotients, fd_kernel_quotients, fd_location_quotients, grad_wrt_features,
    grad_wrt_kernel, grad_wrt_locations, max_rel_disagreement,
};
use rfot_solver::{accelerated_sinkhorn, sinkhorn, SolveConfig, DEFAULT_MARGINAL_TOL};

#[derive(Parser)]
#[command(
    name = "rfot",
    version,
    about = "Entropic transport with factorized kernels: solve, benchmark, budget, check"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one transport problem between two measure files.
    Solve(SolveArgs),
    /// Run a benchmark sweep and write a CSV (and optional SVG).
    Bench(BenchArgs),
    /// Print the feature count prescribed for a target accuracy.
    Budget(BudgetArgs),
    /// Compare the analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic dataset to measure files.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Source measure file (.json for JSON, anything else CSV).
    #[arg(long)]
    mu: PathBuf,
    /// Target measure file.
    #[arg(long)]
    nu: PathBuf,
    #[arg(long, default_value = "dense_sinkhorn")]
    method: Method,
    /// Regularization strength.
    #[arg(long)]
    epsilon: f64,
    /// Feature count; required by the factorized methods.
    #[arg(long)]
    r: Option<usize>,
    /// Feature draw seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Marginal tolerance.
    #[arg(long, default_value_t = DEFAULT_MARGINAL_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Cost function: squared_euclidean or neg_log_dot (dense only).
    #[arg(long, default_value = "squared_euclidean")]
    cost: String,
    /// Include the dual potentials in the JSON report.
    #[arg(long)]
    potentials: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment spec JSON file; when given, the grid flags are ignored.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Dataset: gaussians2d, sphere_caps, or files.
    #[arg(long, default_value = "gaussians2d")]
    dataset: String,
    /// Points per cloud for synthetic datasets.
    #[arg(long, default_value_t = 4000)]
    n: usize,
    /// Cap angular radius in radians for the sphere dataset.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Source measure file for the files dataset.
    #[arg(long)]
    mu: Option<PathBuf>,
    /// Target measure file for the files dataset.
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
    epsilons: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [500])]
    r_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [Method::DenseSinkhorn, Method::RfSinkhorn])]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1e-8)]
    ground_truth_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    bench_tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Seed of the synthetic dataset (cell seeds drive feature draws).
    #[arg(long, default_value_t = 0)]
    dataset_seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG scatter path (time versus deviation).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Run cells concurrently; wall times become unreliable. Worker
    /// count comes from RFOT_THREADS when set.
    #[arg(long)]
    parallel_cells: bool,
}

#[derive(Args)]
struct BudgetArgs {
    /// Target accuracy on the transport value (same units as the value).
    #[arg(long)]
    delta: f64,
    /// Failure probability.
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    epsilon: f64,
    /// Radius of the ball containing both supports.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Support size bounding the finite-set branch.
    #[arg(long)]
    n: usize,
    /// Sup-norm bound on the cost; defaults to (2 radius)^2, the bound
    /// for the squared Euclidean cost on the ball.
    #[arg(long)]
    c_inf: Option<f64>,
    /// Multiplier on the budget formula.
    #[arg(long, default_value_t = DEFAULT_BUDGET_CONSTANT)]
    scale: f64,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 0.8)]
    epsilon: f64,
    /// Seed for the check instances and feature draws.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Tolerance for the kernel-entry gradient.
    #[arg(long, default_value_t = 1e-4)]
    kernel_tol: f64,
    /// Tolerance for the location and feature gradients.
    #[arg(long, default_value_t = 1e-3)]
    point_tol: f64,
    /// Corrupt the analytic gradients before comparing (negative
    /// control; the command must then exit 1).
    #[arg(long)]
    corrupt: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Dataset: gaussians2d or sphere_caps.
    #[arg(long, default_value = "gaussians2d")]
    dataset: String,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Cap angular radius in radians for the sphere dataset.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Source measure output path (.json for JSON, anything else CSV).
    #[arg(long)]
    out_mu: PathBuf,
    /// Target measure output path.
    #[arg(long)]
    out_nu: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Budget(args) => cmd_budget(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match outcome {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let mu = read_measure(&args.mu)?;
    let nu = read_measure(&args.nu)?;
    let cost_spec = match args.cost.as_str() {
        "squared_euclidean" => CostSpec::squared_euclidean(args.epsilon)?,
        "neg_log_dot" => CostSpec::neg_log_dot(args.epsilon)?,
        other => bail!("unknown cost {other:?} (expected squared_euclidean or neg_log_dot)"),
    };
    let kernel = if args.method.is_factorized() {
        ensure!(
            args.cost == "squared_euclidean",
            "factorized methods sample Gaussian features and support only the \
             squared_euclidean cost"
        );
        let Some(r) = args.r else {
            bail!("--r is required for factorized methods");
        };
        let radius = mu.max_norm().max(nu.max_norm());
        let map = FeatureMapSpec::gaussian(args.epsilon, radius, mu.dim())?;
        let features = sample_features(&map, r, args.seed)?;
        KernelOperator::factorized(features.embed(&mu)?, features.embed(&nu)?)?
    } else {
        let cost = cost_matrix(&mu, &nu, &cost_spec)?;
        gibbs_kernel(cost.view(), args.epsilon)?
    };

    let config = SolveConfig {
        marginal_tol: args.tol,
        max_iters: args.max_iters,
        ..SolveConfig::default()
    };
    let a = mu.weights().to_owned();
    let b = nu.weights().to_owned();
    let report = match args.method {
        Method::RfAccelerated => {
            accelerated_sinkhorn(&kernel, &a, &b, args.epsilon, &config, None)?
        }
        _ => sinkhorn(&kernel, &a, &b, args.epsilon, &config)?,
    };

    let mut output = report.to_json(args.potentials);
    if let Some(object) = output.as_object_mut() {
        object.insert("method".into(), json!(args.method.label()));
        object.insert("epsilon".into(), json!(args.epsilon));
        object.insert("r".into(), json!(args.r.unwrap_or(0)));
        object.insert("seed".into(), json!(args.seed));
    }
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(check_result(report.converged))
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<ExperimentSpec>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => {
            let dataset = match args.dataset.as_str() {
                "gaussians2d" => DatasetSpec::Gaussians2d { n: args.n },
                "sphere_caps" => DatasetSpec::SphereCaps {
                    n: args.n,
                    alpha: args.alpha,
                },
                "files" => {
                    let (Some(mu), Some(nu)) = (&args.mu, &args.nu) else {
                        bail!("the files dataset requires --mu and --nu");
                    };
                    DatasetSpec::Files {
                        mu: mu.display().to_string(),
                        nu: nu.display().to_string(),
                    }
                }
                other => bail!(
                    "unknown dataset {other:?} (expected gaussians2d, sphere_caps, or files)"
                ),
            };
            ExperimentSpec {
                dataset,
                epsilons: args.epsilons.clone(),
                r_values: args.r_values.clone(),
                seeds: args.seeds.clone(),
                methods: args.methods.clone(),
                ground_truth_tol: args.ground_truth_tol,
                bench_tol: args.bench_tol,
                max_iters: args.max_iters,
                dataset_seed: args.dataset_seed,
            }
        }
    };

    let threads = match std::env::var("RFOT_THREADS") {
        Ok(text) => Some(
            text.parse::<usize>()
                .with_context(|| format!("RFOT_THREADS must be a positive integer, got {text:?}"))?
                .max(1),
        ),
        Err(_) => None,
    };
    let records = run_benchmark(&spec, &args.out, args.parallel_cells, threads)?;
    if let Some(svg_path) = &args.svg {
        std::fs::write(svg_path, scatter_svg(&records))
            .with_context(|| format!("writing {}", svg_path.display()))?;
    }

    let failures = records.iter().filter(|r| !r.converged).count();
    eprintln!(
        "{} cells -> {} ({} unconverged)",
        records.len(),
        args.out.display(),
        failures
    );
    Ok(check_result(failures == 0))
}

fn cmd_budget(args: BudgetArgs) -> Result<ExitCode> {
    let spec = FeatureMapSpec::gaussian(args.epsilon, args.radius, args.dim)?;
    let constants = concentration_constants(&spec)?;
    let c_inf = args.c_inf.unwrap_or((2.0 * args.radius).powi(2));
    let r = rfot_features::feature_budget(
        args.delta,
        args.tau,
        &constants,
        args.dim,
        args.epsilon,
        c_inf,
        args.n,
        args.scale,
    )?;
    println!("{r}");
    let output = json!({
        "r": r,
        "delta": args.delta,
        "tau": args.tau,
        "epsilon": args.epsilon,
        "radius": args.radius,
        "dim": args.dim,
        "n": args.n,
        "c_inf": c_inf,
        "scale": args.scale,
        "constants": constants,
    });
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(ExitCode::SUCCESS)
}

/// Gradient check instances: a seeded dense kernel whose entries stay
/// far from zero (finite differencing must preserve positivity) and a
/// small feature-map problem.
struct CheckInstances {
    kernel: Array2<f64>,
    a: Array1<f64>,
    b: Array1<f64>,
    features: SampledFeatures,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
}

fn check_instances(epsilon: f64, seed: u64) -> Result<CheckInstances> {
    let rng = CounterRng::new(STREAM_DATASET, seed);
    let kernel = Array2::from_shape_fn((3, 3), |(i, j)| {
        0.15 + 1.05 * rng.uniform(i as u64, j as u64, 0)
    });
    let weights = |offset: u64, len: usize| -> Array1<f64> {
        let mut w =
            Array1::from_shape_fn(len, |i| 0.2 + 0.8 * rng.uniform(i as u64, offset, 1));
        w /= w.sum();
        w
    };
    let a = weights(100, 3);
    let b = weights(101, 3);

    let points = |offset: u64, len: usize| -> Result<DiscreteMeasure> {
        let coords = Array2::from_shape_fn((len, 2), |(i, c)| {
            1.1 * rng.uniform(i as u64, offset + c as u64, 2) - 0.55
        });
        let mut w =
            Array1::from_shape_fn(len, |i| 0.2 + 0.8 * rng.uniform(i as u64, offset + 10, 3));
        w /= w.sum();
        Ok(DiscreteMeasure::new(coords, w)?)
    };
    let mu = points(200, 4)?;
    let nu = points(300, 4)?;
    let map = FeatureMapSpec::gaussian(epsilon, 1.0, 2)?;
    let features = sample_features(&map, 3, seed)?;
    Ok(CheckInstances {
        kernel,
        a,
        b,
        features,
        mu,
        nu,
    })
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<ExitCode> {
    let instances = check_instances(args.epsilon, args.seed)?;
    let config = SolveConfig {
        marginal_tol: 1e-13,
        max_iters: 200_000,
        check_every: 1,
        ..SolveConfig::default()
    };
    let corruption = |fd: &Array2<f64>| -> f64 {
        let scale = fd.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-12);
        if args.corrupt {
            0.1 * scale
        } else {
            0.0
        }
    };

    let kernel_op = KernelOperator::dense(instances.kernel.clone())?;
    let solved = sinkhorn(&kernel_op, &instances.a, &instances.b, args.epsilon, &config)?;
    ensure!(solved.converged, "the kernel check instance did not converge");
    let mut kernel_grad = grad_wrt_kernel(
        &kernel_op,
        instances.a.view(),
        instances.b.view(),
        args.epsilon,
        &solved.potentials,
    )?
    .grad;
    let kernel_fd = fd_kernel_quotients(
        instances.kernel.view(),
        instances.a.view(),
        instances.b.view(),
        args.epsilon,
        &config,
    )?;
    kernel_grad[[0, 0]] += corruption(&kernel_fd);
    let kernel_err = max_rel_disagreement(kernel_grad.view(), kernel_fd.view());

    let xi = instances.features.embed(&instances.mu)?;
    let zeta = instances.features.embed(&instances.nu)?;
    let factorized = KernelOperator::factorized(xi, zeta)?;
    let a = instances.mu.weights().to_owned();
    let b = instances.nu.weights().to_owned();
    let solved = sinkhorn(&factorized, &a, &b, args.epsilon, &config)?;
    ensure!(solved.converged, "the feature check instance did not converge");

    let mut location = grad_wrt_locations(
        &instances.features,
        &instances.mu,
        &instances.nu,
        &solved.potentials,
    )?;
    let (fd_x, fd_y) =
        fd_location_quotients(&instances.features, &instances.mu, &instances.nu, &config)?;
    location.wrt_x.grad[[0, 0]] += corruption(&fd_x);
    let location_err = max_rel_disagreement(location.wrt_x.grad.view(), fd_x.view())
        .max(max_rel_disagreement(location.wrt_y.grad.view(), fd_y.view()));

    let mut feature_grad = grad_wrt_features(
        &instances.features,
        &instances.mu,
        &instances.nu,
        &solved.potentials,
    )?
    .grad;
    let feature_fd =
        fd_feature_quotients(&instances.features, &instances.mu, &instances.nu, &config)?;
    feature_grad[[0, 0]] += corruption(&feature_fd);
    let feature_err = max_rel_disagreement(feature_grad.view(), feature_fd.view());

    let checks = [
        ("kernel", kernel_err, args.kernel_tol),
        ("locations", location_err, args.point_tol),
        ("features", feature_err, args.point_tol),
    ];
    let all_pass = checks.iter().all(|(_, err, tol)| err <= tol);
    let mut report = serde_json::Map::new();
    for (name, err, tol) in checks {
        report.insert(
            name.into(),
            json!({"fd_max_rel_err": err, "tolerance": tol, "pass": err <= tol}),
        );
    }
    report.insert("pass".into(), json!(all_pass));
    println!(
        "{}",
        serde_json::to_string_pretty(&serde_json::Value::Object(report))?
    );
    Ok(check_result(all_pass))
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let (mu, nu) = match args.dataset.as_str() {
        "gaussians2d" => gen_gaussians(args.n, args.seed)?,
        "sphere_caps" => gen_sphere_caps(args.n, args.alpha, args.seed)?,
        other => bail!("unknown dataset {other:?} (expected gaussians2d or sphere_caps)"),
    };
    write_measure(&mu, &args.out_mu)?;
    write_measure(&nu, &args.out_nu)?;
    let output = json!({
        "mu": args.out_mu.display().to_string(),
        "nu": args.out_nu.display().to_string(),
        "n": args.n,
        "dim": mu.dim(),
        "max_norm_mu": mu.max_norm(),
        "max_norm_nu": nu.max_norm(),
    });
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(ExitCode::SUCCESS)
}

fn check_result(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
