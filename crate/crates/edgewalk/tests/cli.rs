//! Integration tests of the command-line surface: exit codes, schema
//! validation, output contents, and re-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU64, Ordering};

static DIR_COUNTER: AtomicU64 = AtomicU64::new(0);

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "edgewalk-cli-{}-{}",
        std::process::id(),
        DIR_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(command: &str, config_json: &str, dir: &Path, extra: &[&str]) -> Output {
    let config_path = dir.join("config.json");
    std::fs::write(&config_path, config_json).unwrap();
    let out_dir = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_edgewalk"))
        .args([
            command,
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .args(extra)
        .output()
        .unwrap()
}

fn read_csv_rows(dir: &Path, name: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{name}.csv"))).unwrap();
    text.lines()
        .skip(1)
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect()
}

fn field(row: &[String], header: &[String], name: &str) -> f64 {
    let idx = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("column {name}"));
    row[idx].parse().unwrap()
}

fn read_header(dir: &Path, name: &str) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{name}.csv"))).unwrap();
    text.lines().next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn missing_seed_exits_2_and_names_the_key() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"matrix": {"kind": "zeros", "dim": 4}, "phis": [0.5]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("seed"), "stderr should name the missing key: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "zeros", "dim": 4}, "phis": [0.5], "bogus_key": 3}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bogus_key"), "stderr should list the offending key: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unreadable_matrix_file_exits_2() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "file", "path": "/nonexistent/matrix.json"}, "phis": [0.5]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn edges_zero_matrix_closed_form_row() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "zeros", "dim": 10}, "phis": [0.5]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "edges");
    let rows = read_csv_rows(&dir, "edges");
    assert_eq!(rows.len(), 1);
    assert!((field(&rows[0], &header, "lower_edge") + 20.0).abs() <= 1e-9);
    assert!((field(&rows[0], &header, "upper_edge") - 20.0).abs() <= 1e-9);
    assert_eq!(field(&rows[0], &header, "lambda_min"), 0.0);
    assert_eq!(field(&rows[0], &header, "lambda_max"), 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn edges_diag_and_identity_closed_forms() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "diag", "values": [1.0, 3.0]}, "phis": [1.0]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "edges");
    let rows = read_csv_rows(&dir, "edges");
    assert!((field(&rows[0], &header, "lower_edge") - (1.0 - 2.0f64.sqrt())).abs() <= 1e-9);
    assert!((field(&rows[0], &header, "upper_edge") - (3.0 + 2.0f64.sqrt())).abs() <= 1e-9);
    std::fs::remove_dir_all(&dir).ok();

    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "identity", "dim": 1}, "phis": [1.0]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "edges");
    let rows = read_csv_rows(&dir, "edges");
    assert!((field(&rows[0], &header, "lower_edge") - 0.0).abs() <= 1e-9);
    assert!((field(&rows[0], &header, "upper_edge") - 2.0).abs() <= 1e-9);
    assert_eq!(field(&rows[0], &header, "lambda_min"), 1.0);
    assert_eq!(field(&rows[0], &header, "lambda_max"), 1.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn walk_zero_steps_emits_initial_edge_row() {
    let dir = scratch_dir();
    let out = run(
        "walk",
        r#"{"seed": 3, "sampler": {"kind": "gaussian", "dim": 8}, "steps": 0, "side": "lower", "phi": 0.5, "t": 0.1}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "walk");
    let rows = read_csv_rows(&dir, "walk");
    assert_eq!(rows.len(), 1);
    assert_eq!(field(&rows[0], &header, "k"), 0.0);
    assert!((field(&rows[0], &header, "edge") + 16.0).abs() <= 1e-9);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn walk_increments_nonnegative_and_edge_brackets_spectrum() {
    let dir = scratch_dir();
    let out = run(
        "walk",
        r#"{"seed": 5, "sampler": {"kind": "sphere", "dim": 6}, "steps": 40, "side": "upper", "phi": 0.2, "tau": 0.1}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "walk");
    let rows = read_csv_rows(&dir, "walk");
    assert_eq!(rows.len(), 41);
    for row in &rows[1..] {
        assert!(field(row, &header, "exact_increment") >= -1e-9);
        assert!(field(row, &header, "explicit_shift") >= 0.0);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/walk.json")).unwrap()).unwrap();
    let final_edge = json["result"]["final_edge"].as_f64().unwrap();
    let lmax = json["result"]["final_lambda_max"].as_f64().unwrap();
    assert!(final_edge > lmax);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_sphere_trace_gap_is_zero() {
    let dir = scratch_dir();
    let out = run(
        "estimate",
        r#"{"seed": 9, "sampler": {"kind": "sphere", "dim": 6}, "n_samples": 30, "trials": 5}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let header = read_header(&dir, "estimate");
    let rows = read_csv_rows(&dir, "estimate");
    assert!(field(&rows[0], &header, "mean_trace_gap") <= 1e-12);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_colored_sampler_via_config() {
    let dir = scratch_dir();
    let out = run(
        "estimate",
        r#"{"seed": 9, "sampler": {"kind": "colored", "base": "gaussian", "dim": 3,
            "sigma": [[4.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},
            "n_samples": 60, "trials": 4}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/estimate.json")).unwrap())
            .unwrap();
    assert_eq!(json["result"]["colored"]["submultiplicativity_violations"], 0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_side_and_bad_sampler_exit_2() {
    let dir = scratch_dir();
    let out = run(
        "walk",
        r#"{"seed": 3, "sampler": {"kind": "gaussian", "dim": 8}, "steps": 0, "side": "sideways", "phi": 0.5, "t": 0.1}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let out = run(
        "estimate",
        r#"{"seed": 9, "sampler": {"kind": "pareto_product", "dim": 4, "alpha": 1.5}, "n_samples": 10, "trials": 2}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_flag_overrides_config_and_is_embedded() {
    let dir = scratch_dir();
    let out = run(
        "edges",
        r#"{"seed": 1, "matrix": {"kind": "zeros", "dim": 2}, "phis": [0.5]}"#,
        &dir,
        &["--seed", "42"],
    );
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/edges.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 42);
    assert_eq!(json["config"]["seed"], 42);
    let csv = std::fs::read_to_string(dir.join("out/edges.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert_eq!(row.split(',').nth(1).unwrap(), "42");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn rerun_of_same_manifest_is_byte_identical() {
    let dir_a = scratch_dir();
    let dir_b = scratch_dir();
    let config = r#"{"seed": 21, "sampler": {"kind": "pareto_product", "dim": 10, "alpha": 4.5},
        "n_samples": 80, "trials": 8, "target_eps": 0.9}"#;
    let out_a = run("estimate", config, &dir_a, &[]);
    let out_b = run("estimate", config, &dir_b, &[]);
    assert_eq!(out_a.status.code(), Some(0));
    assert_eq!(out_b.status.code(), Some(0));
    for name in ["estimate.json", "estimate.csv"] {
        let a = std::fs::read(dir_a.join("out").join(name)).unwrap();
        let b = std::fs::read(dir_b.join("out").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
    std::fs::remove_dir_all(&dir_a).ok();
    std::fs::remove_dir_all(&dir_b).ok();
}

#[test]
fn sweep_tails_fixedn_commands_run_end_to_end() {
    let dir = scratch_dir();
    let out = run(
        "sweep",
        r#"{"seed": 31, "kind": "gaussian", "eps": 0.7, "n_values": [4, 8], "trials": 6}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = read_header(&dir, "sweep");
    let rows = read_csv_rows(&dir, "sweep");
    assert_eq!(rows.len(), 2);
    assert!(field(&rows[0], &header, "n_min") >= 4.0);
    std::fs::remove_dir_all(&dir).ok();

    let dir = scratch_dir();
    let out = run(
        "tails",
        r#"{"seed": 33, "check": "sr", "sampler": {"kind": "pareto_product", "dim": 8, "alpha": 4.5},
            "sample_count": 4000, "rank_k": 1, "thresholds": [2.0, 4.0, 8.0, 16.0]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv_rows(&dir, "tails");
    assert_eq!(rows.len(), 4);
    std::fs::remove_dir_all(&dir).ok();

    let dir = scratch_dir();
    let out = run(
        "tails",
        r#"{"seed": 35, "check": "thin_shell", "sampler": {"kind": "cube", "dim": 16},
            "sample_count": 2000, "p": 2.0, "ranks": [1, 4]}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();

    let dir = scratch_dir();
    let out = run(
        "fixedn",
        r#"{"seed": 37, "sampler": {"kind": "gaussian", "dim": 12, "known_params": [3.0, 2.0]},
            "y_values": [0.5, 0.25], "trials": 8}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = read_header(&dir, "fixedn");
    let rows = read_csv_rows(&dir, "fixedn");
    assert!(field(&rows[0], &header, "bound_upper") > 1.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn rerun_from_embedded_config_round_trips() {
    let dir = scratch_dir();
    let out = run(
        "estimate",
        r#"{"seed": 51, "sampler": {"kind": "cube", "dim": 5}, "n_samples": 40, "trials": 6}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let envelope: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/estimate.json")).unwrap())
            .unwrap();

    // Re-run from the config embedded in the output.
    let dir2 = scratch_dir();
    let out = run("estimate", &envelope["config"].to_string(), &dir2, &[]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["estimate.json", "estimate.csv"] {
        let a = std::fs::read(dir.join("out").join(name)).unwrap();
        let b = std::fs::read(dir2.join("out").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs after round-trip");
    }
    std::fs::remove_dir_all(&dir).ok();
    std::fs::remove_dir_all(&dir2).ok();
}

#[test]
fn counterexample_aubrun_small_run() {
    let dir = scratch_dir();
    let out = run(
        "counterexample",
        r#"{"seed": 41, "kind": "aubrun", "sizes": [8, 16, 32], "trials": 4}"#,
        &dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = read_header(&dir, "counterexample");
    let rows = read_csv_rows(&dir, "counterexample");
    for row in &rows {
        assert_eq!(field(row, &header, "bound_violations"), 0.0);
    }
    std::fs::remove_dir_all(&dir).ok();
}
