//! End-to-end acceptance run. Each criterion prints one `pass`/`fail` line;
//! run with `cargo test --test acceptance -- --nocapture` to see them.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use graph_poincare::calculus::Exponent;
use graph_poincare::engine::{certify_constant_p2, estimate_constant, EstimateOptions};
use graph_poincare::experiments::{ex31_point, ex31_sweep, ex32_point, harmonic, harmonic_closed_form};
use graph_poincare::graph::{ball, classify_region, generate, Family};
use graph_poincare::measure::Measure;
use graph_poincare::{seed, Error};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpoincare"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("file exists")).expect("valid JSON")
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn verify_suite(suite: &str, trials: &str) -> (Output, Value, f64) {
    let start = Instant::now();
    let out = run(&["verify", "--suite", suite, "--trials", trials, "--seed", "20240601"]);
    let secs = start.elapsed().as_secs_f64();
    let v = json(&out);
    (out, v, secs)
}

fn criterion_1() -> Outcome {
    let (out, v, secs) = verify_suite("thm21", "500");
    let failures = v["failures"].as_u64().unwrap();
    let checked = v["inequality_checks"].as_u64().unwrap();
    outcome(
        out.status.success() && failures == 0 && checked > 0 && secs < 60.0,
        format!("{checked} checks, {failures} violations, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let (out, v, _) = verify_suite("cor23", "200");
    let ineq = v["inequality_failures"].as_u64().unwrap();
    let growth = v["growth_violations"].as_u64().unwrap();
    let doubling = v["doubling_violations"].as_u64().unwrap();
    outcome(
        out.status.success() && ineq + growth + doubling == 0 && v["growth_checked"].as_u64().unwrap() > 0,
        format!(
            "inequality {ineq}, growth {growth} of {}, doubling {doubling} of {}",
            v["growth_checked"], v["doubling_checked"]
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut problems = Vec::new();
    for k in [4u32, 8, 16, 32, 64] {
        let pt = ex31_point(k).unwrap();
        let half = u64::from(k) / 2;
        let sum: u64 = (0..=u64::from(k)).sum();
        if sum != half * (u64::from(k) + 1) || pt.mean != half as f64 {
            problems.push(format!("k={k}: mean {}", pt.mean));
        }
        let grad_ok = pt.gradient.len() == k as usize + 1
            && pt.gradient.iter().enumerate().all(|(j, &g)| g == if j == 0 { 1.0 } else { 2.0 });
        if !grad_ok {
            problems.push(format!("k={k}: gradient"));
        }
        let sup_dev = (0..=u64::from(k)).map(|j| j.abs_diff(half)).max().unwrap();
        let sup_grad = pt.gradient.iter().copied().fold(0.0, f64::max);
        if sup_dev as f64 / sup_grad != f64::from(k) / 4.0 || sup_dev * 4 != 2 * u64::from(k) {
            problems.push(format!("k={k}: sup ratio"));
        }
        if k >= 8 && (pt.quasiconvex || pt.witness.is_none()) {
            problems.push(format!("k={k}: quasiconvexity"));
        }
    }
    let rep = ex31_sweep(&[4, 8, 16, 32, 64], &[Exponent::Infinity]).unwrap();
    if !rep.passed() {
        problems.extend(rep.failures());
    }
    outcome(problems.is_empty(), if problems.is_empty() { "all exact".to_string() } else { problems.join("; ") })
}

fn criterion_4(dir: &Path) -> Outcome {
    let start = Instant::now();
    let out = run(&["reproduce", "ex31", "--p", "1.5,2,4", "--k", "8..256", "--geometric", "--out", dir.to_str().unwrap()]);
    let secs = start.elapsed().as_secs_f64();
    let v = read_json(&dir.join("ex31.verdict.json"));
    let mut ok = out.status.success() && secs < 120.0;
    let mut parts = Vec::new();
    for s in v["sweeps"].as_array().unwrap() {
        let p = num(&s["p"]);
        let slope = num(&s["slope_fit"]["slope"]);
        let r2 = num(&s["slope_fit"]["r_squared"]);
        ok &= (slope - (1.0 - 1.0 / p)).abs() <= 0.15 && r2 >= 0.98;
        parts.push(format!("p={p}: slope {slope:.3}, r² {r2:.4}"));
    }
    ok &= parts.len() == 3;
    outcome(ok, format!("{}; {secs:.2} s", parts.join(", ")))
}

fn criterion_5(dir: &Path) -> Outcome {
    let out = run(&["reproduce", "ex32", "--p", "1,2", "--k", "64..65536", "--geometric", "--out", dir.to_str().unwrap()]);
    let v = read_json(&dir.join("ex32.verdict.json"));
    let mut ok = out.status.success();
    let mut parts = Vec::new();
    for s in v["sweeps"].as_array().unwrap() {
        let spread = num(&s["spread"]);
        ok &= spread <= 4.0;
        parts.push(format!("p={}: spread {spread:.3}", s["p"]));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let mut k = 64u64;
    while k <= 65536 {
        ok &= close(harmonic(k), harmonic_closed_form(k));
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0)] {
            let pt = ex32_point(k, p).unwrap();
            let closed = if p == Exponent::Finite(1.0) { (2 * k + 1) as f64 } else { (k * (k + 1)) as f64 };
            ok &= pt.display_closed == Some(closed) && close(pt.display_sum, closed);
            ok &= close(pt.mass, pt.mass_closed) && close(pt.norm_grad, pt.norm_grad_closed);
        }
        k *= 2;
    }
    outcome(ok && parts.len() == 2, format!("{}; closed forms to 1e-12", parts.join(", ")))
}

fn criterion_6(dir: &Path) -> Outcome {
    let out = run(&["reproduce", "prop34", "--p", "1,inf", "--r", "4..12", "--seed", "11", "--out", dir.to_str().unwrap()]);
    let v = read_json(&dir.join("prop34.verdict.json"));
    let mut ok = out.status.success();
    let mut parts = Vec::new();
    for s in v["sweeps"].as_array().unwrap() {
        let rows = s["rows"].as_array().unwrap();
        ok &= rows.len() == 9;
        if s["p"] == "inf" {
            let worst = rows.iter().map(|r| num(&r["normalized_ratio"]) * 3.0 - num(&r["k"])).fold(f64::INFINITY, f64::min);
            ok &= worst >= 0.0;
            parts.push(format!("p=inf: min 3·ratio − r = {worst}"));
        } else {
            let slope = num(&s["slope_fit"]["slope"]);
            ok &= (slope - 1.0).abs() <= 0.1;
            parts.push(format!("p=1: log2 slope {slope:.4}"));
        }
    }
    let means_ok = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().ends_with("mean"))
        .all(|c| c["passed"] == true);
    let split = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "p=inf: balanced split" || c["name"] == "balanced split");
    let split_ok = split.is_some_and(|c| c["passed"] == true);
    ok &= means_ok && split_ok;
    parts.push(format!("split: {}", split.map(|c| c["detail"].to_string()).unwrap_or_default()));
    outcome(ok, parts.join(", "))
}

fn criterion_7() -> Outcome {
    let (out, v, secs) = verify_suite("thm41", "500");
    let excess = num(&v["chain_max_excess"]);
    outcome(
        out.status.success() && v["failures"] == 0 && excess <= 1.0,
        format!(
            "{} checks, {} violations, chain excess {excess}, within 2r rate {:.3}, flow mass with diam rate {:.3}, {secs:.2} s",
            v["inequality_checks"], v["inequality_failures"], num(&v["chain_within_2r_rate"]), num(&v["flow_mass_within_diam_rate"])
        ),
    )
}

fn criterion_8() -> Outcome {
    let m = Measure::counting();
    let mut ok = true;
    let (mut certified, mut size_skips, mut worst) = (0usize, 0usize, 0.0f64);
    for i in 0..50u64 {
        let s = seed::derive(8, i);
        let n = 3 + (s % 6) as u32;
        let b = 2 + (seed::splitmix64(s) % 3) as u32;
        let extra = (seed::splitmix64(s ^ 1) % 3) as u32;
        let g = generate(&Family::RandomBoundedDegree { n, b, extra }, s).unwrap();
        let mut regions = vec![classify_region(&g, g.vertices()).unwrap()];
        for c in g.vertices() {
            for r in 0..=2 {
                regions.push(ball(&g, c, r).unwrap());
            }
        }
        for e in regions {
            let opts = EstimateOptions { seed: s, restarts: 20, iters: 200 };
            match certify_constant_p2(&g, &e, &m, opts) {
                Ok(est) => {
                    let upper = est.upper.unwrap();
                    let gap = upper - est.lower;
                    worst = worst.max(if upper > 0.0 { gap / upper } else { gap });
                    ok &= gap <= 1e-6 * upper && gap >= -1e-12;
                    certified += 1;
                }
                Err(Error::Size { .. }) => size_skips += 1,
                Err(err) => panic!("graph {i}: {err}"),
            }
        }
    }
    let g = generate(&Family::Path { n: 2 }, 0).unwrap();
    let e = classify_region(&g, [0, 1]).unwrap();
    for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity] {
        ok &= estimate_constant(&g, &e, &m, p, EstimateOptions::default()).unwrap().lower == 0.5;
    }
    let cert = certify_constant_p2(&g, &e, &m, EstimateOptions::default()).unwrap();
    ok &= cert.lower == 0.5 && cert.upper == Some(0.5);
    ok &= certified >= 200;
    outcome(
        ok,
        format!("{certified} regions certified, {size_skips} over the edge limit, worst relative gap {worst:e}; single edge 0.5"),
    )
}

fn criterion_9(dir: &Path) -> Outcome {
    let runs: Vec<Vec<&str>> = vec![
        vec!["verify", "--suite", "thm21", "--trials", "60", "--seed", "9"],
        vec!["verify", "--suite", "cor23", "--trials", "40", "--seed", "9"],
        vec!["verify", "--suite", "thm41", "--trials", "60", "--seed", "9"],
        vec!["verify", "--suite", "doubling", "--trials", "40", "--seed", "9"],
        vec!["reproduce", "ex31", "--p", "2,inf", "--k", "8..64", "--geometric"],
        vec!["reproduce", "ex32", "--k", "64..4096", "--geometric"],
        vec!["reproduce", "prop34", "--seed", "9", "--trials", "30"],
        vec!["reproduce", "thm35", "--r", "2..6"],
        vec!["reproduce", "flow", "--seed", "9", "--trials", "60"],
        vec!["estimate", "--family", "random_bounded_degree:n=7,b=2,extra=2", "--seed", "9"],
        vec!["estimate", "--family", "homogeneous_tree:b=2,depth=5", "--region", "ball:0,3", "--p", "3", "--seed", "9"],
        vec!["sweep", "--family", "homogeneous_tree:b=2,depth=5", "--r", "1..2", "--seed", "9", "--restarts", "8"],
    ];
    let mut mismatches = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for pass in 0..2 {
            let out_dir = dir.join(format!("run{i}-{pass}"));
            let meta = dir.join(format!("meta{i}-{pass}.json"));
            let mut full = args.clone();
            let (o, m) = (out_dir.to_str().unwrap().to_string(), meta.to_str().unwrap().to_string());
            full.extend(["--out", &o, "--meta", &m]);
            let out = run(&full);
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
                .map(|rd| {
                    rd.map(|e| {
                        let e = e.unwrap();
                        (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
                    })
                    .collect()
                })
                .unwrap_or_default();
            files.sort();
            outputs.push((out.status.code(), out.stdout, files));
        }
        if outputs[0] != outputs[1] || outputs[0].2.is_empty() {
            mismatches.push(args.join(" "));
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} commands byte-identical across reruns", runs.len())
        } else {
            format!("differs: {}", mismatches.join("; "))
        },
    )
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let sub = |name: &str| dir.path().join(name);
    let results = [
        ("1 local inequality suite", criterion_1()),
        ("2 explicit-constant suite with growth and doubling", criterion_2()),
        ("3 grid example exactness", criterion_3()),
        ("4 grid example asymptotics", criterion_4(&sub("c4"))),
        ("5 line example bounded ratio and closed forms", criterion_5(&sub("c5"))),
        ("6 extremal constructions and balanced split", criterion_6(&sub("c6"))),
        ("7 flow measure suite", criterion_7()),
        ("8 estimator and certifier closure", criterion_8()),
        ("9 determinism", criterion_9(&sub("c9"))),
    ];
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.passed { "pass" } else { "fail" }, o.detail);
    }
    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
