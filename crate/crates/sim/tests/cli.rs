//! End-to-end CLI behavior: file formats, exit codes, schema strictness
//! and manifest replay.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cpsim-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn gen_simple_4_3_is_k4_and_deterministic() {
    let d1 = tmp("gen1");
    let d2 = tmp("gen2");
    for dir in [&d1, &d2] {
        let out = cpsim(&[
            "gen", "--n", "4", "--d", "3", "--simple", "--seed", "9", "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let g1 = read(&d1, "graph.txt");
    assert_eq!(g1, "4 3\n1 2 3\n0 2 3\n0 1 3\n0 1 2\n");
    assert_eq!(g1, read(&d2, "graph.txt"), "same seed must be byte-identical");
}

#[test]
fn gen_odd_half_edges_exits_2() {
    let dir = tmp("genodd");
    let out = cpsim(&["gen", "--n", "3", "--d", "3", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn misspelled_config_key_exits_2() {
    let dir = tmp("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "lamda = 2.0\n").unwrap();
    let out = cpsim(&[
        "tree",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lamda") || err.contains("unknown field"), "{err}");
}

#[test]
fn epsilon_out_of_range_exits_2() {
    let dir = tmp("eps");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("eps.toml");
    std::fs::write(&cfg, "epsilon = 0.5\n").unwrap();
    let out = cpsim(&[
        "cutoff",
        "--config",
        cfg.to_str().unwrap(),
        "--c-hat",
        "1.5",
        "--p-hat",
        "0.8",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tree_lambda_zero_reports_unit_mean_extinction() {
    let dir = tmp("tree0");
    let out = cpsim(&[
        "tree", "--lambda", "0", "--d", "3", "--replicas", "1000", "--horizon", "50",
        "--seed", "3", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir, "tree_report.json")).unwrap();
    let mean = report["report"]["mean_extinction_time"].as_f64().unwrap();
    assert!((mean - 1.0).abs() < 0.1, "mean extinction {mean}");
    // Series CSV has the documented header.
    let series = read(&dir, "tree_series.csv");
    assert!(series.starts_with("replica,t,infected,ever,pioneers\n"));
}

#[test]
fn tree_capacity_exits_4_with_partial_results() {
    let dir = tmp("treecap");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cap.toml");
    std::fs::write(&cfg, "node_cap = 40\n[tree]\nreplicas = 30\nhorizon = 20.0\n").unwrap();
    let out = cpsim(&[
        "tree",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    // Partial results are still written and flagged.
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir, "tree_report.json")).unwrap();
    assert!(report["report"]["capacity_truncated"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_reads_graph_file_and_rejects_bad_ones() {
    let dir = tmp("simfile");
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("k4.txt");
    std::fs::write(&good, "4 3\n1 2 3\n0 2 3\n0 1 3\n0 1 2\n").unwrap();
    let out = cpsim(&[
        "simulate", "--graph", good.to_str().unwrap(), "--replicas", "5", "--horizon", "2",
        "--seed", "1", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = read(&dir, "series.csv");
    assert!(series.starts_with("replica,t,infected,ever_infected\n"));
    assert!(read(&dir, "hits.jsonl").lines().count() == 5);

    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "4 3\n1 2 3\n0 2\n0 1 3\n0 1 2\n").unwrap();
    let out = cpsim(&[
        "simulate", "--graph", bad.to_str().unwrap(), "--out-dir", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn estimate_emits_exact_field_names() {
    let dir = tmp("est");
    let out = cpsim(&[
        "estimate", "--replicas", "150", "--survival-replicas", "150", "--horizon", "3",
        "--window", "1", "3", "--survival-threshold", "50", "--seed", "2", "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let est: serde_json::Value = serde_json::from_str(&read(&dir, "estimates.json")).unwrap();
    for key in ["c_hat", "c_se", "p_hat", "p_se", "window", "replicas"] {
        assert!(est.get(key).is_some(), "missing field {key}");
    }
    assert!(est["c_hat"].as_f64().unwrap() > 0.0);
    assert!(est["p_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn estimate_lambda_grid_reports_survival_transition() {
    let dir = tmp("grid");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("grid.toml");
    std::fs::write(
        &cfg,
        "[estimate]\nreplicas = 100\nhorizon = 2.0\nwindow = [0.5, 2.0]\nsurvival_replicas = 200\nsurvival_threshold = 50\nsurvival_t_cap = 15.0\nlambda_grid = [0.2, 2.0]\n",
    )
    .unwrap();
    let out = cpsim(&[
        "estimate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "12",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let grid: serde_json::Value =
        serde_json::from_str(&read(&dir, "survival_grid.json")).unwrap();
    let rows = grid["report"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let p_low = rows[0]["p_hat"].as_f64().unwrap();
    let p_high = rows[1]["p_hat"].as_f64().unwrap();
    assert!(p_low <= p_high, "survival must not decrease in lambda: {p_low} vs {p_high}");
    assert!(p_high > 0.3);
}

#[test]
fn cutoff_writes_one_point_per_n() {
    let dir = tmp("cut");
    let out = cpsim(&[
        "cutoff", "--n-list", "100,200", "--replicas", "40", "--c-hat", "1.54", "--p-hat",
        "0.82", "--seed", "4", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir, "cutoff_report.json")).unwrap();
    let points = report["report"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0]["n"].as_u64(), Some(100));
    assert_eq!(points[1]["n"].as_u64(), Some(200));
    // CSV: header + one row per (n, replica).
    let csv = read(&dir, "cutoff_replicas.csv");
    assert_eq!(csv.lines().count(), 1 + 2 * 40);
    // Summary CSV: one row per n.
    let pts = read(&dir, "cutoff_points.csv");
    assert_eq!(pts.lines().count(), 1 + 2);
    assert!(pts.lines().nth(1).unwrap().starts_with("100,"));
    assert!(pts.lines().nth(2).unwrap().starts_with("200,"));
}

#[test]
fn plot_flag_emits_gnuplot_data() {
    let dir = tmp("plot");
    let out = cpsim(&[
        "tree", "--lambda", "1.0", "--replicas", "30", "--horizon", "2", "--plot", "--seed",
        "8", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let dat = read(&dir, "tree_mean.dat");
    assert!(dat.starts_with("# t mean_infected\n"));
    assert!(dat.lines().count() > 10);
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir, "manifest.json")).unwrap();
    assert!(manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .any(|v| v == "tree_mean.dat"));
}

#[test]
fn replay_reproduces_outputs_byte_identically_across_thread_counts() {
    let dir1 = tmp("rep1");
    let out = cpsim(&[
        "tree", "--lambda", "1.5", "--replicas", "60", "--horizon", "3", "--seed", "77",
        "--threads", "1", "--out-dir", dir1.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let dir2 = tmp("rep2");
    let manifest = dir1.join("manifest.json");
    let out = cpsim(&[
        "replay",
        manifest.to_str().unwrap(),
        "--threads",
        "3",
        "--out-dir",
        dir2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["tree_series.csv", "tree_report.json"] {
        assert_eq!(read(&dir1, file), read(&dir2, file), "{file} must be identical");
    }
    // The manifest lists exactly the produced outputs.
    let m: serde_json::Value = serde_json::from_str(&read(&dir1, "manifest.json")).unwrap();
    let outputs: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, vec!["tree_report.json", "tree_series.csv"]);
}

#[test]
fn intersect_and_density_commands_run_small() {
    let dir = tmp("small");
    let out = cpsim(&[
        "intersect", "--n", "200", "--replicas", "50", "--c-hat", "1.54", "--p-hat", "0.82",
        "--seed", "6", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = cpsim(&[
        "density", "--n", "300", "--replicas", "10", "--c-hat", "1.54", "--p-hat", "0.82",
        "--seed", "6", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&read(&dir, "density_report.json")).unwrap();
    // Reports embed the resolved config and master seed.
    assert_eq!(report["master_seed"].as_u64(), Some(6));
    assert_eq!(report["config"]["density"]["n"].as_u64(), Some(300));
}
