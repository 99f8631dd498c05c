//! Binary-level behavior: exit codes, file formats, determinism, and the
//! shipped presets.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_unravel")
}

fn presets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("unravel-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("config written");
    path
}

const MINIMAL_ONE_MODE: &str = r#"
schema_version = 1
time_unit = "omega"
seed = 7

[grid]
dt = 0.1
n_steps = 6

[system]
n_qubits = 1
initial_state = "plus"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "modes"
modes = [[1.0, 0.0]]
"#;

const SMALL_UNRAVEL: &str = r#"
schema_version = 1
time_unit = "omega"
seed = 11

[grid]
dt = 0.02
n_steps = 60

[system]
n_qubits = 2
initial_state = "bell"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "modes"
modes = [[0.55, 1.4], [0.35, 2.9], [0.25, 0.6]]

[[system.qubits]]
h_z = 0.0

[squeezing]
rule = "optimal"
target_time = 1.2
epsilon = 1e-3

[ensemble]
n_samples = 300

[output]
trajectory_norms = 1
"#;

#[test]
fn presets_parse_and_validate() {
    let dir = presets_dir();
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).expect("presets dir") {
        let path = entry.expect("entry").path();
        if path.extension().is_some_and(|e| e == "toml") {
            unravel_cli::config::ScenarioConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{path:?}: {e}"));
            count += 1;
        }
    }
    assert!(count >= 7, "expected the shipped presets, found {count}");
}

#[test]
fn unknown_key_is_config_error() {
    let dir = tmp_dir("badkey");
    let cfg = write_config(
        &dir,
        "bad.toml",
        &format!("{MINIMAL_ONE_MODE}\nnot_a_key = 3\n"),
    );
    let out = run(&["correlations", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        code(&out),
        2,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn missing_config_is_config_error() {
    let out = run(&["correlations", "--config", "/nonexistent/x.toml"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn correlations_writes_triangular_kernel() {
    let dir = tmp_dir("corr");
    let cfg = write_config(&dir, "one.toml", MINIMAL_ONE_MODE);
    let out_dir = dir.join("out");
    let out = run(&[
        "correlations",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let kernel = std::fs::read_to_string(out_dir.join("kernel_0.csv")).expect("kernel csv");
    // (n_steps + 1)(n_steps + 2) / 2 data rows plus the header.
    assert_eq!(kernel.lines().count(), 1 + 7 * 8 / 2);
    // Zero squeezing: the eta columns vanish identically.
    for line in kernel.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[4].parse::<f64>().expect("float"), 0.0);
        assert_eq!(cols[5].parse::<f64>().expect("float"), 0.0);
    }
    assert!(out_dir.join("resolved_config.json").exists());
}

#[test]
fn analytic_markov_refuses_kernel_and_writes_rates() {
    let dir = tmp_dir("markov");
    let cfg = write_config(
        &dir,
        "markov.toml",
        r#"
schema_version = 1
time_unit = "gamma"
seed = 1

[grid]
dt = 0.05
n_steps = 10

[system]
n_qubits = 1
initial_state = "plus"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "markov"
rate = 0.8
"#,
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "correlations",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("integrated rates"), "stdout: {stdout}");
    assert!(out_dir.join("rates_0.csv").exists());
    assert!(!out_dir.join("kernel_0.csv").exists());
    // The same analytic bath cannot drive the sampling pipeline.
    let out = run(&[
        "unravel",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out2").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unravel_is_deterministic_and_config_round_trips() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(&dir, "small.toml", SMALL_UNRAVEL);
    let (a, b, c) = (dir.join("a"), dir.join("b"), dir.join("c"));
    for out_dir in [&a, &b] {
        let out = run(&[
            "unravel",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for file in [
        "rho.csv",
        "entanglement.csv",
        "fig_data.csv",
        "trajectory_000.csv",
        "summary.json",
    ] {
        let fa = std::fs::read(a.join(file)).unwrap_or_else(|_| panic!("{file} missing"));
        let fb = std::fs::read(b.join(file)).expect("second run output");
        assert_eq!(fa, fb, "{file} differs between identical runs");
    }
    // Re-running from the resolved config reproduces everything bitwise.
    let resolved = a.join("resolved_config.json");
    let out = run(&[
        "unravel",
        "--config",
        resolved.to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for file in ["rho.csv", "entanglement.csv", "fig_data.csv"] {
        let fa = std::fs::read(a.join(file)).expect("first run output");
        let fc = std::fs::read(c.join(file)).expect("round-trip output");
        assert_eq!(fa, fc, "{file} differs after config round-trip");
    }
    // Different seed, different Monte-Carlo outputs.
    let d = dir.join("d");
    let out = run(&[
        "unravel",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "999",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let fa = std::fs::read(a.join("rho.csv")).expect("baseline");
    let fd = std::fs::read(d.join("rho.csv")).expect("reseeded");
    assert_ne!(fa, fd);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tmp_dir("threads");
    let cfg = write_config(&dir, "small.toml", SMALL_UNRAVEL);
    let (a, b) = (dir.join("t1"), dir.join("t4"));
    for (out_dir, threads) in [(&a, "1"), (&b, "4")] {
        let out = run(&[
            "unravel",
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let fa = std::fs::read(a.join("rho.csv")).expect("single-thread output");
    let fb = std::fs::read(b.join("rho.csv")).expect("multi-thread output");
    assert_eq!(fa, fb, "reduction must not depend on the thread count");
}

#[test]
fn sample_supports_both_sampler_paths() {
    let dir = tmp_dir("samplers");
    for sampler in ["modesum", "covariance"] {
        let cfg = write_config(
            &dir,
            &format!("{sampler}.toml"),
            &format!(
                r#"
schema_version = 1
time_unit = "omega"
seed = 13

[grid]
dt = 0.05
n_steps = 12

[system]
n_qubits = 1
initial_state = "plus"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "modes"
modes = [[0.7, 1.3], [0.3, 0.5]]

[squeezing]
rule = "per_mode_phase"
phases = [0.4, -1.1]
magnitude = 0.6

[ensemble]
n_samples = 4000
sampler = "{sampler}"

[output]
trajectory_norms = 1
"#
            ),
        );
        let out_dir = dir.join(format!("out-{sampler}"));
        let out = run(&[
            "sample",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&out),
            0,
            "{sampler} stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out_dir.join("ensemble_stats.csv").exists());
        assert!(out_dir.join("noise_000.csv").exists());
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out_dir.join("ensemble_summary.json")).unwrap(),
        )
        .expect("summary json");
        assert_eq!(summary["n_samples"], serde_json::json!(4000));
        assert!(summary["max_alpha_dev"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn ohmic_preset_emits_consistent_fig_data() {
    let dir = tmp_dir("ohmic");
    let preset = presets_dir().join("ohmic.toml");
    let out_dir = dir.join("out");
    let out = run(&[
        "unravel",
        "--config",
        preset.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fig = std::fs::read_to_string(out_dir.join("fig_data.csv")).expect("fig data");
    let mut lines = fig.lines();
    assert_eq!(lines.next(), Some("t,xbar_opt,xbar_zero,exact"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().expect("float")).collect();
        let (xbar_opt, xbar_zero, exact) = (cols[1], cols[2], cols[3]);
        // The per-target optimal bound hugs the exact curve; the plain rule
        // stays above it.
        assert!((xbar_opt - exact).abs() < 3e-3, "row {line}");
        assert!(xbar_zero >= exact - 1e-12, "row {line}");
        rows += 1;
    }
    assert_eq!(rows, 301);
}

#[test]
fn oracle_preset_passes_all_residuals() {
    let dir = tmp_dir("oracle");
    let preset = presets_dir().join("oracle_onemode.toml");
    let out_dir = dir.join("out");
    let out = run(&[
        "oracle",
        "--config",
        preset.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("oracle_report.json")).unwrap())
            .expect("report json");
    assert_eq!(report["passed"], serde_json::json!(true));
    assert!(report["identity_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn oracle_truncation_leak_exits_4() {
    let dir = tmp_dir("leak");
    let cfg = write_config(
        &dir,
        "leak.toml",
        r#"
schema_version = 1
time_unit = "omega"
seed = 3

[grid]
dt = 0.1
n_steps = 10

[system]
n_qubits = 1
initial_state = "plus"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "modes"
modes = [[2.0, 0.3]]

[oracle]
n_max = 2
quad_nodes = 8
xi = [[0.0, 0.0]]
sample_times = [0.5]
z_nodes = [[0.3, 0.0]]
"#,
    );
    let out = run(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        4,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn optimize_scan_preset_finds_analytic_phase() {
    let dir = tmp_dir("optscan");
    let preset = presets_dir().join("optimize_scan.toml");
    let out_dir = dir.join("out");
    let out = run(&[
        "optimize",
        "--config",
        preset.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("search_result.json")).unwrap())
            .expect("result json");
    assert!(result["analytic_phase_gap"].as_f64().unwrap() < 1e-3);
    assert_eq!(result["budget_exhausted"], serde_json::json!(false));
    assert!(out_dir.join("search_trace.csv").exists());
}

#[test]
fn optimize_zero_budget_flags_best_effort() {
    let dir = tmp_dir("optzero");
    let cfg = write_config(
        &dir,
        "zero.toml",
        r#"
schema_version = 1
time_unit = "omega"
seed = 5

[grid]
dt = 0.01
n_steps = 120

[system]
n_qubits = 1
initial_state = "plus"

[[system.qubits]]
h_z = 0.0

[system.qubits.bath]
kind = "modes"
modes = [[0.5, 1.0]]

[optimize]
objective = "minimize"
target_time = 1.0
n_starts = 1
budget = 0
"#,
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("search_result.json")).unwrap())
            .expect("result json");
    assert_eq!(result["budget_exhausted"], serde_json::json!(true));
}

#[test]
fn restore_preset_bound_reaches_one() {
    let dir = tmp_dir("restore");
    let preset = presets_dir().join("restore.toml");
    let out_dir = dir.join("out");
    let out = run(&[
        "unravel",
        "--config",
        preset.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .expect("summary json");
    assert!(summary["bound_at_final_time"].as_f64().unwrap() > 0.99);
}
