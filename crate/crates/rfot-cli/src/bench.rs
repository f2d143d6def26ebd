//! Benchmark execution and CSV persistence.
//!
//! A sweep expands into cells, one per (method, epsilon, r, seed). Every
//! cell is timed end to end: feature sampling, embedding, and the solve
//! for factorized methods; cost matrix and kernel construction for the
//! dense method, so the recorded times include the setup each method
//! actually pays. Ground truth per epsilon is solved once, untimed, on
//! the dense kernel at the tighter tolerance, and each cell records its
//! deviation
//!
//! ```text
//!     D = 100 (ROT - W_hat) / |ROT| + 100,
//! ```
//!
//! so an exact cell reads 100. Rows are flushed as they complete; a cell
//! that fails outright still yields a row with `converged=false` so a
//! long sweep never loses its finished cells.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use ndarray::Array1;
use rfot_core::{cost_matrix, gibbs_kernel, CostSpec, DiscreteMeasure, KernelOperator};
use rfot_features::{sample_features, FeatureMapSpec};
use rfot_solver::{accelerated_sinkhorn, sinkhorn, SolveConfig};

use crate::dataset::{gen_gaussians, gen_sphere_caps, read_measure};
use crate::experiment::{DatasetSpec, ExperimentSpec, Method};

/// Exact header of every benchmark CSV.
pub const CSV_HEADER: &str = "method,epsilon,r,seed,wall_time_s,w_hat,deviation_pct,converged";

/// One finished benchmark cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub epsilon: f64,
    /// Feature count; 0 for the dense method.
    pub r: usize,
    pub seed: u64,
    /// End-to-end cell time including kernel setup.
    pub wall_time_s: f64,
    pub w_hat: f64,
    pub deviation_pct: f64,
    pub converged: bool,
}

impl BenchRecord {
    /// CSV row matching [`CSV_HEADER`]. Floats use the shortest
    /// round-trip decimal form, so identical solves produce identical
    /// text.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.method.label(),
            self.epsilon,
            self.r,
            self.seed,
            self.wall_time_s,
            self.w_hat,
            self.deviation_pct,
            self.converged
        )
    }
}

/// One unit of benchmark work.
#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    eps_index: usize,
    r: usize,
    seed: u64,
}

/// Everything a cell needs, fixed before the sweep starts.
struct RunContext {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    a: Array1<f64>,
    b: Array1<f64>,
    /// Feature domain radius covering both clouds.
    radius: f64,
    epsilons: Vec<f64>,
    ground_truths: Vec<f64>,
    config: SolveConfig,
}

/// Loads the dataset a spec names.
///
/// # Errors
/// Generation or file reading failures.
pub fn load_dataset(spec: &DatasetSpec, dataset_seed: u64) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    match spec {
        DatasetSpec::Gaussians2d { n } => gen_gaussians(*n, dataset_seed),
        DatasetSpec::SphereCaps { n, alpha } => gen_sphere_caps(*n, *alpha, dataset_seed),
        DatasetSpec::Files { mu, nu } => Ok((
            read_measure(Path::new(mu))?,
            read_measure(Path::new(nu))?,
        )),
    }
}

fn expand_cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let mut cells = Vec::new();
    for eps_index in 0..spec.epsilons.len() {
        for &method in &spec.methods {
            let r_grid: &[usize] = if method.is_factorized() {
                &spec.r_values
            } else {
                &[0]
            };
            for &r in r_grid {
                for &seed in &spec.seeds {
                    cells.push(Cell {
                        method,
                        eps_index,
                        r,
                        seed,
                    });
                }
            }
        }
    }
    cells
}

/// Solves the dense problem at the ground-truth tolerance.
fn ground_truth(ctx_mu: &DiscreteMeasure, ctx_nu: &DiscreteMeasure, a: &Array1<f64>, b: &Array1<f64>, epsilon: f64, spec: &ExperimentSpec) -> Result<f64> {
    let cost = cost_matrix(ctx_mu, ctx_nu, &CostSpec::squared_euclidean(epsilon)?)?;
    let kernel = gibbs_kernel(cost.view(), epsilon)?;
    let config = SolveConfig {
        marginal_tol: spec.ground_truth_tol,
        max_iters: spec.max_iters,
        ..SolveConfig::default()
    };
    let report = sinkhorn(&kernel, a, b, epsilon, &config)?;
    ensure!(
        report.converged,
        "ground truth solve at epsilon {epsilon} stopped at residual {:.3e} \
         after {} iterations; raise max_iters or loosen ground_truth_tol",
        report.marginal_residual,
        report.iters
    );
    Ok(report.w_hat)
}

/// Runs one cell, timing it end to end. Failures become rows with
/// `converged=false` and NaN values rather than aborting the sweep.
fn run_cell(ctx: &RunContext, cell: &Cell) -> BenchRecord {
    let epsilon = ctx.epsilons[cell.eps_index];
    let rot = ctx.ground_truths[cell.eps_index];
    let start = Instant::now();
    let outcome = (|| -> Result<(f64, bool)> {
        let kernel = if cell.method.is_factorized() {
            let map = FeatureMapSpec::gaussian(epsilon, ctx.radius, ctx.mu.dim())?;
            let features = sample_features(&map, cell.r, cell.seed)?;
            let xi = features.embed(&ctx.mu)?;
            let zeta = features.embed(&ctx.nu)?;
            KernelOperator::factorized(xi, zeta)?
        } else {
            let cost = cost_matrix(&ctx.mu, &ctx.nu, &CostSpec::squared_euclidean(epsilon)?)?;
            gibbs_kernel(cost.view(), epsilon)?
        };
        let report = match cell.method {
            Method::RfAccelerated => {
                accelerated_sinkhorn(&kernel, &ctx.a, &ctx.b, epsilon, &ctx.config, None)?
            }
            _ => sinkhorn(&kernel, &ctx.a, &ctx.b, epsilon, &ctx.config)?,
        };
        Ok((report.w_hat, report.converged))
    })();
    let wall_time_s = start.elapsed().as_secs_f64();
    let (w_hat, converged) = match outcome {
        Ok(pair) => pair,
        Err(error) => {
            eprintln!(
                "cell {} eps={} r={} seed={} failed: {error:#}",
                cell.method.label(),
                epsilon,
                cell.r,
                cell.seed
            );
            (f64::NAN, false)
        }
    };
    let deviation_pct = 100.0 * (rot - w_hat) / rot.abs() + 100.0;
    BenchRecord {
        method: cell.method,
        epsilon,
        r: cell.r,
        seed: cell.seed,
        wall_time_s,
        w_hat,
        deviation_pct,
        converged,
    }
}

/// Runs a full sweep and writes the CSV to `csv_path`.
///
/// Cells run sequentially in grid order unless `parallel` is set, in
/// which case `threads` workers (or the machine's parallelism) share the
/// cell list and rows are written in grid order after the join. The
/// solved values are identical either way; only wall times change.
///
/// # Errors
/// Invalid specs, dataset failures, unconverged ground truth, and CSV
/// write failures. Per-cell failures do not error; they produce
/// `converged=false` rows.
pub fn run_benchmark(
    spec: &ExperimentSpec,
    csv_path: &Path,
    parallel: bool,
    threads: Option<usize>,
) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let (mu, nu) = load_dataset(&spec.dataset, spec.dataset_seed)?;
    ensure!(
        mu.dim() == nu.dim(),
        "measures have different dimensions ({} vs {})",
        mu.dim(),
        nu.dim()
    );
    let a = mu.weights().to_owned();
    let b = nu.weights().to_owned();
    let mut ground_truths = Vec::with_capacity(spec.epsilons.len());
    for &epsilon in &spec.epsilons {
        ground_truths.push(ground_truth(&mu, &nu, &a, &b, epsilon, spec)?);
    }
    let radius = mu.max_norm().max(nu.max_norm());
    let ctx = RunContext {
        radius,
        a,
        b,
        mu,
        nu,
        epsilons: spec.epsilons.clone(),
        ground_truths,
        config: SolveConfig {
            marginal_tol: spec.bench_tol,
            max_iters: spec.max_iters,
            ..SolveConfig::default()
        },
    };

    let cells = expand_cells(spec);
    if cells.is_empty() {
        bail!("the spec expands to zero cells");
    }
    let _ = run_cell(&ctx, &cells[0]);

    let file = File::create(csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    let mut writer = BufWriter::new(file);
    writeln!(writer, "{CSV_HEADER}")?;

    let records = if parallel {
        let workers = threads
            .or_else(|| std::thread::available_parallelism().ok().map(|p| p.get()))
            .unwrap_or(1)
            .max(1);
        eprintln!(
            "warning: running cells on {workers} threads; wall times share the \
             machine and are NOT comparable across cells"
        );
        let slots: Vec<Mutex<Option<BenchRecord>>> =
            cells.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= cells.len() {
                        break;
                    }
                    let record = run_cell(&ctx, &cells[i]);
                    *slots[i].lock().expect("no panics hold this lock") = Some(record);
                });
            }
        });
        let mut records = Vec::with_capacity(cells.len());
        for slot in slots {
            let record = slot
                .into_inner()
                .expect("no panics hold this lock")
                .expect("every index below cells.len() was claimed");
            writeln!(writer, "{}", record.csv_row())?;
            records.push(record);
        }
        records
    } else {
        let mut records = Vec::with_capacity(cells.len());
        for cell in &cells {
            let record = run_cell(&ctx, cell);
            writeln!(writer, "{}", record.csv_row())?;
            writer.flush()?;
            records.push(record);
        }
        records
    };
    writer.flush()?;
    Ok(records)
}
