use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpoincare")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_thm41_passes() {
    let out = run(&["verify", "--suite", "thm41", "--trials", "500", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite"], "thm41");
    assert_eq!(v["trials"], 500);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["seed"], 7);
}

#[test]
fn zero_trials_is_a_vacuous_pass_with_warning() {
    let out = run(&["verify", "--suite", "thm21", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vacuous"));
    assert_eq!(json(&out)["failures"], 0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["verify", "--suite", "nope", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "thm21", "--trials", "5"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "flow"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "ex31", "--tolerance", "0.1"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "ex31", "--k", "7"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--family", "path:n=2"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--family", "path:n=2", "--seed", "1", "--region", "ball:0"]).status.code(), Some(2));
    assert_eq!(run(&["estimate", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn budget_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "ex32", "--p", "1", "--k", "4194304", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn estimate_single_edge_is_certified() {
    let v = json(&run(&["estimate", "--family", "path:n=2", "--seed", "1"]));
    assert_eq!(v["lower"], 0.5);
    assert_eq!(v["upper"], 0.5);
    assert_eq!(v["certified"], true);
}

#[test]
fn estimate_binary_tree_ball_closes() {
    let v = json(&run(&["estimate", "--family", "homogeneous_tree:b=2,depth=4", "--region", "ball:0,2", "--seed", "3"]));
    let (lo, hi) = (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!(hi - lo <= 1e-6 * hi, "{lo} {hi}");
}

#[test]
fn estimate_singleton_is_zero() {
    let v = json(&run(&["estimate", "--family", "path:n=3", "--region", "set:1", "--seed", "1"]));
    assert_eq!(v["lower"], 0.0);
}

#[test]
fn estimate_falls_back_beyond_the_edge_limit() {
    let out = run(&["estimate", "--family", "complete:n=7", "--seed", "1", "--restarts", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v.get("upper").is_none());
    assert_eq!(v["certified"], false);
    assert!(v["notice"].as_str().unwrap().contains("lower bound only"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("notice"));
}

#[test]
fn estimate_reads_graph_and_measure_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let m = dir.path().join("m.json");
    std::fs::write(&g, "# family=custom\n0 1\n").unwrap();
    std::fs::write(&m, r#"{"weights": {"0": 2.0, "1": 2.0}, "alpha": 2.0, "beta": 2.0, "kind": "custom"}"#).unwrap();
    let v = json(&run(&[
        "estimate",
        "--graph",
        g.to_str().unwrap(),
        "--measure",
        m.to_str().unwrap(),
        "--seed",
        "1",
        "--p",
        "inf",
    ]));
    assert_eq!(v["lower"], 0.5);
    assert_eq!(v["p"], "inf");
}

#[test]
fn reproduce_ex31_at_infinity_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "ex31", "--p", "inf", "--k", "8,16,32,64", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("ex31.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,p,lhs,denominator,normalized_ratio"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let k: f64 = cols[0].parse().unwrap();
        assert_eq!(cols[1], "inf");
        let (lhs, den, ratio): (f64, f64, f64) = (cols[2].parse().unwrap(), cols[3].parse().unwrap(), cols[4].parse().unwrap());
        // ‖∇f‖_∞ = 2 and the sup deviation is k/2, so lhs/‖∇f‖_∞ = k/4.
        assert_eq!(lhs / 2.0, k / 4.0);
        assert_eq!(ratio, lhs / den);
    }
    assert!(!csv.contains('\r'));
    let verdict: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ex31.verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["verdict"], "pass");
}

#[test]
fn reproduce_prop34_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "prop34", "--p", "1", "--r", "4..12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("prop34.verdict.json")).unwrap()).unwrap();
    let slope = v["sweeps"][0]["slope_fit"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.1, "{slope}");
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5, "trials": 12}"#).unwrap();
    let a = json(&run(&["verify", "--suite", "doubling", "--config", cfg.to_str().unwrap()]));
    assert_eq!((a["seed"].as_u64(), a["trials"].as_u64()), (Some(5), Some(12)));
    let b = json(&run(&["verify", "--suite", "doubling", "--config", cfg.to_str().unwrap(), "--trials", "3"]));
    assert_eq!((b["seed"].as_u64(), b["trials"].as_u64()), (Some(5), Some(3)));
    std::fs::write(&cfg, r#"{"sed": 5}"#).unwrap();
    assert_eq!(run(&["verify", "--suite", "doubling", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn meta_side_channel_is_separate() {
    let dir = tempfile::tempdir().unwrap();
    let meta = dir.path().join("meta.json");
    let out = run(&["verify", "--suite", "cor23", "--trials", "10", "--seed", "2", "--meta", meta.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(&meta).unwrap()).unwrap();
    assert!(m["started_unix_ms"].as_u64().unwrap() > 0);
    assert_eq!(m["exit_code"], 0);
    assert!(json(&out).get("started_unix_ms").is_none());
}

#[test]
fn sweep_stays_below_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--family",
        "cycle:n=9",
        "--r",
        "1..3",
        "--p",
        "1,2",
        "--seed",
        "4",
        "--restarts",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn negative_tolerance_is_rejected() {
    assert_eq!(run(&["verify", "--suite", "thm21", "--trials", "3", "--seed", "1", "--tolerance", "-1"]).status.code(), Some(2));
}
