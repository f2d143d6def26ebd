//! End-to-end contract of the `rfot` binary: subcommand output shapes,
//! determinism across re-runs, and the exit code convention (0 success,
//! 1 check failure, 2 invalid input).

use std::path::Path;
use std::process::{Command, Output};

fn rfot(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfot"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("the binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&output.stdout);
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("stdout is JSON ({e}): {text}"))
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn gen_writes_identical_files_per_seed_and_rejects_unknown_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |mu: &str, nu: &str| {
        rfot(
            &[
                "gen", "--dataset", "gaussians2d", "--n", "50", "--seed", "9", "--out-mu", mu,
                "--out-nu", nu,
            ],
            dir.path(),
        )
    };
    let first = gen("mu1.csv", "nu1.csv");
    assert_eq!(exit_code(&first), 0, "{first:?}");
    let report = stdout_json(&first);
    assert_eq!(report["n"], 50);
    assert!(report["max_norm_nu"].as_f64().unwrap() <= 1.0 + 1e-15);

    let second = gen("mu2.csv", "nu2.csv");
    assert_eq!(exit_code(&second), 0);
    let bytes = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(bytes("mu1.csv"), bytes("mu2.csv"));
    assert_eq!(bytes("nu1.csv"), bytes("nu2.csv"));

    let bad = rfot(
        &[
            "gen", "--dataset", "moons", "--out-mu", "x.csv", "--out-nu", "y.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&bad), 2);
}

#[test]
fn solve_reports_json_and_classifies_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let gen = rfot(
        &[
            "gen", "--n", "30", "--seed", "4", "--out-mu", "mu.csv", "--out-nu", "nu.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&gen), 0);

    let solved = rfot(
        &[
            "solve", "--mu", "mu.csv", "--nu", "nu.csv", "--epsilon", "0.5", "--method",
            "rf_sinkhorn", "--r", "32", "--potentials",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&solved), 0, "{solved:?}");
    let report = stdout_json(&solved);
    assert_eq!(report["method"], "rf_sinkhorn");
    assert_eq!(report["converged"], true);
    assert!(report["w_hat"].as_f64().unwrap().is_finite());
    assert_eq!(report["u"].as_array().unwrap().len(), 30);
    assert!(report["log_offset_u"].is_number());

    let missing_file = rfot(
        &["solve", "--mu", "absent.csv", "--nu", "nu.csv", "--epsilon", "0.5"],
        dir.path(),
    );
    assert_eq!(exit_code(&missing_file), 2);

    let missing_r = rfot(
        &[
            "solve", "--mu", "mu.csv", "--nu", "nu.csv", "--epsilon", "0.5", "--method",
            "rf_sinkhorn",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&missing_r), 2);

    let rf_wrong_cost = rfot(
        &[
            "solve", "--mu", "mu.csv", "--nu", "nu.csv", "--epsilon", "0.5", "--method",
            "rf_sinkhorn", "--r", "32", "--cost", "neg_log_dot",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&rf_wrong_cost), 2);
}

#[test]
fn budget_prints_the_count_then_json_and_rejects_bad_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let output = rfot(
        &[
            "budget", "--delta", "0.1", "--tau", "0.1", "--epsilon", "0.5", "--n", "1000",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let text = String::from_utf8_lossy(&output.stdout);
    let mut lines = text.lines();
    let r: usize = lines.next().unwrap().trim().parse().unwrap();
    assert!(r >= 1);
    let rest: String = lines.collect::<Vec<_>>().join("\n");
    let report: serde_json::Value = serde_json::from_str(&rest).unwrap();
    assert_eq!(report["r"].as_u64().unwrap() as usize, r);
    assert!(report["constants"]["psi"].as_f64().unwrap() > 0.0);

    let bad = rfot(
        &[
            "budget", "--delta", "1.5", "--tau", "0.1", "--epsilon", "0.5", "--n", "1000",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&bad), 2);
}

#[test]
fn gradcheck_passes_clean_and_fails_the_corrupt_control() {
    let dir = tempfile::tempdir().unwrap();
    let clean = rfot(&["gradcheck"], dir.path());
    assert_eq!(exit_code(&clean), 0, "{clean:?}");
    let report = stdout_json(&clean);
    assert_eq!(report["pass"], true);
    for object in ["kernel", "locations", "features"] {
        let err = report[object]["fd_max_rel_err"].as_f64().unwrap();
        let tol = report[object]["tolerance"].as_f64().unwrap();
        assert!(err <= tol, "{object} err {err} over {tol}");
    }

    let corrupt = rfot(&["gradcheck", "--corrupt"], dir.path());
    assert_eq!(exit_code(&corrupt), 1, "{corrupt:?}");
    let report = stdout_json(&corrupt);
    assert_eq!(report["pass"], false);
}

#[test]
fn bench_emits_the_exact_schema_and_reproduces_w_hat_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str| {
        rfot(
            &[
                "bench",
                "--n",
                "48",
                "--epsilons",
                "0.5",
                "--r-values",
                "24",
                "--seeds",
                "0,1",
                "--methods",
                "dense_sinkhorn,rf_sinkhorn",
                "--ground-truth-tol",
                "1e-9",
                "--bench-tol",
                "1e-7",
                "--out",
                out,
                "--svg",
                "plot.svg",
            ],
            dir.path(),
        )
    };
    let first = run("a.csv");
    assert_eq!(exit_code(&first), 0, "{first:?}");
    let second = run("b.csv");
    assert_eq!(exit_code(&second), 0);

    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    let (a, b) = (read("a.csv"), read("b.csv"));
    assert_eq!(
        a.lines().next().unwrap(),
        "method,epsilon,r,seed,wall_time_s,w_hat,deviation_pct,converged"
    );
    assert_eq!(a.lines().count(), 1 + 2 + 2);

    let column = |text: &str, idx: usize| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').nth(idx).unwrap().to_string())
            .collect()
    };
    assert_eq!(column(&a, 5), column(&b, 5));
    assert_eq!(column(&a, 6), column(&b, 6));

    for line in a.lines().skip(1).take(2) {
        assert!(line.starts_with("dense_sinkhorn,0.5,0,"));
        let deviation: f64 = line.split(',').nth(6).unwrap().parse().unwrap();
        assert!(
            (deviation - 100.0).abs() < 1e-4,
            "dense deviation {deviation} strays from 100"
        );
    }

    let svg = read("plot.svg");
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("deviation (%)"));
}

#[test]
fn bench_accepts_a_spec_file_and_rejects_an_invalid_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = serde_json::json!({
        "dataset": {"kind": "gaussians2d", "n": 32},
        "epsilons": [0.5],
        "r_values": [16],
        "seeds": [0],
        "methods": ["rf_accelerated"],
        "ground_truth_tol": 1e-9,
        "bench_tol": 1e-7,
        "max_iters": 20000
    });
    std::fs::write(dir.path().join("spec.json"), spec.to_string()).unwrap();
    let output = rfot(
        &["bench", "--spec", "spec.json", "--out", "out.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("rf_accelerated,0.5,16,0,"));

    let broken = serde_json::json!({
        "dataset": {"kind": "gaussians2d", "n": 32},
        "epsilons": [],
        "r_values": [16],
        "seeds": [0],
        "methods": ["rf_sinkhorn"]
    });
    std::fs::write(dir.path().join("broken.json"), broken.to_string()).unwrap();
    let rejected = rfot(
        &["bench", "--spec", "broken.json", "--out", "out2.csv"],
        dir.path(),
    );
    assert_eq!(exit_code(&rejected), 2);
}

#[test]
fn parallel_cells_warn_and_match_sequential_values() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, parallel: bool| {
        let mut args = vec![
            "bench",
            "--n",
            "32",
            "--epsilons",
            "0.5",
            "--r-values",
            "16",
            "--seeds",
            "0,1,2",
            "--methods",
            "rf_sinkhorn",
            "--ground-truth-tol",
            "1e-9",
            "--bench-tol",
            "1e-7",
            "--out",
            out,
        ];
        if parallel {
            args.push("--parallel-cells");
        }
        Command::new(env!("CARGO_BIN_EXE_rfot"))
            .args(&args)
            .env("RFOT_THREADS", "2")
            .current_dir(dir.path())
            .output()
            .expect("the binary runs")
    };
    let sequential = run("seq.csv", false);
    assert_eq!(exit_code(&sequential), 0);
    let parallel = run("par.csv", true);
    assert_eq!(exit_code(&parallel), 0);
    assert!(
        String::from_utf8_lossy(&parallel.stderr).contains("NOT comparable"),
        "the concurrency caveat must be loud"
    );

    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    let w_hats = |text: &str| -> Vec<String> {
        text.lines()
            .skip(1)
            .map(|l| l.split(',').nth(5).unwrap().to_string())
            .collect()
    };
    assert_eq!(w_hats(&read("seq.csv")), w_hats(&read("par.csv")));
}
