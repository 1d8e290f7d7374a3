use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use graph_poincare::calculus::Exponent;
use graph_poincare::engine::{
    certify_constant_p2, estimate_constant, thm21_bound, ConstantEstimate, EstimateOptions, PoincareReport,
};
use graph_poincare::experiments::{
    balanced_split_trials, cor23_suite, doubling_suite, ex31_sweep, ex32_sweep, flow_suite, prop34_sweep,
    thm21_suite, thm35_sweep, Check, Reproduction, SuiteReport, SweepResult, SweepRow,
};
use graph_poincare::graph::{ball, classify_region, generate, parse_edge_list, Family, Graph, Region, RegionRecord, VertexId};
use graph_poincare::measure::Measure;
use graph_poincare::{numeric, Error};
use serde::Serialize;

use crate::config::{parse_exponents, parse_integers, to_u32, FileConfig};
use crate::{usage, EstimateArgs, Experiment, GraphSource, ReproduceArgs, Suite, SweepArgs, VerifyArgs};

fn tolerance(flag: Option<f64>, cfg: Option<f64>) -> Result<f64> {
    let tol = flag.or(cfg).unwrap_or(numeric::REL_TOL);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(usage(format!("--tolerance must be a nonnegative number, got {tol}")));
    }
    Ok(tol)
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| usage(format!("{what} is randomized; pass --seed")))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn inequality_failures(reports: &[PoincareReport], tol: f64) -> usize {
    reports.iter().filter(|r| !numeric::le_rel(r.lhs, r.rhs, tol)).count()
}

#[derive(Debug, Serialize)]
struct VerifySummary {
    suite: &'static str,
    trials: usize,
    failures: usize,
    seed: Option<u64>,
    skipped: usize,
    tolerance: f64,
    inequality_checks: usize,
    inequality_failures: usize,
    max_lhs_over_rhs: f64,
    growth_checked: usize,
    growth_violations: usize,
    doubling_checked: usize,
    doubling_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain_max_excess: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chain_within_2r_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flow_mass_within_diam_rate: Option<f64>,
    verdict: &'static str,
}

impl VerifySummary {
    fn from_suite(name: &'static str, rep: &SuiteReport, seed: Option<u64>, tol: f64) -> Self {
        let ineq = inequality_failures(&rep.reports, tol);
        VerifySummary {
            suite: name,
            trials: rep.trials,
            failures: ineq + rep.growth_violations + rep.doubling_violations,
            seed,
            skipped: rep.skipped,
            tolerance: tol,
            inequality_checks: rep.reports.len(),
            inequality_failures: ineq,
            max_lhs_over_rhs: rep.max_lhs_over_rhs,
            growth_checked: rep.growth_checked,
            growth_violations: rep.growth_violations,
            doubling_checked: rep.doubling_checked,
            doubling_violations: rep.doubling_violations,
            chain_max_excess: None,
            chain_within_2r_rate: None,
            flow_mass_within_diam_rate: None,
            verdict: "pass",
        }
    }
}

pub fn verify(args: VerifyArgs, config: Option<&Path>) -> Result<bool> {
    let cfg = FileConfig::load(config)?;
    let tol = tolerance(args.tolerance, cfg.tolerance)?;
    let default_trials = match args.suite {
        Suite::Thm21 | Suite::Thm41 => 500,
        Suite::Cor23 | Suite::Doubling => 200,
    };
    let trials = args.trials.or(cfg.trials).unwrap_or(default_trials);
    let seed = args.seed.or(cfg.seed);
    let master = if trials == 0 {
        eprintln!("warning: --trials 0 runs no instances; the suite passes vacuously");
        seed.unwrap_or(0)
    } else {
        require_seed(seed, "verify")?
    };
    let mut summary = match args.suite {
        Suite::Thm21 => VerifySummary::from_suite("thm21", &thm21_suite(trials, master)?, seed, tol),
        Suite::Cor23 => VerifySummary::from_suite("cor23", &cor23_suite(trials, master)?, seed, tol),
        Suite::Doubling => VerifySummary::from_suite("doubling", &doubling_suite(trials, master)?, seed, tol),
        Suite::Thm41 => {
            let rep = flow_suite(trials, master)?;
            let ineq = inequality_failures(&rep.reports, tol);
            let side = usize::from(!rep.chain_within_diam_plus_one) + usize::from(!rep.flow_mass_within_diam_plus_one);
            let max_ratio = rep
                .reports
                .iter()
                .filter(|r| r.rhs > 0.0)
                .map(|r| r.lhs / r.rhs)
                .fold(0.0, f64::max);
            VerifySummary {
                suite: "thm41",
                trials,
                failures: ineq + side,
                seed,
                skipped: rep.skipped,
                tolerance: tol,
                inequality_checks: rep.reports.len(),
                inequality_failures: ineq,
                max_lhs_over_rhs: max_ratio,
                growth_checked: 0,
                growth_violations: 0,
                doubling_checked: 0,
                doubling_violations: 0,
                chain_max_excess: Some(rep.chain_max_excess),
                chain_within_2r_rate: Some(rep.chain_within_2r_rate),
                flow_mass_within_diam_rate: Some(rep.flow_mass_within_diam_rate),
                verdict: "pass",
            }
        }
    };
    let passed = summary.failures == 0;
    summary.verdict = if passed { "pass" } else { "fail" };
    let text = pretty(&summary);
    if let Some(dir) = args.out.or(cfg.out) {
        write(&dir, &format!("{}.json", summary.suite), &text)?;
    }
    print!("{text}");
    Ok(passed)
}

/// A list flag resolved against the config file and the family default.
fn list(flag: Option<String>, cfg: Option<String>, geometric: bool, default: (&str, bool)) -> Result<Vec<u64>> {
    match flag.or(cfg) {
        Some(text) => parse_integers(&text, geometric),
        None => parse_integers(default.0, default.1),
    }
}

fn exponents(flag: Option<String>, cfg: Option<String>, default: &str) -> Result<Vec<Exponent>> {
    parse_exponents(&flag.or(cfg).unwrap_or_else(|| default.to_string()))
}

pub fn reproduce(args: ReproduceArgs, config: Option<&Path>) -> Result<bool> {
    let mut cfg = FileConfig::load(config)?;
    let geometric = args.geometric || cfg.geometric.unwrap_or(false);
    let b = args.b.or(cfg.b).unwrap_or(2);
    let seed = args.seed.or(cfg.seed);
    let out = args.out.clone().or(cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    if args.family != Experiment::Flow && args.tolerance.is_some() {
        return Err(usage("--tolerance applies to reproduce flow only"));
    }
    let (p_flag, k_flag, r_flag) = (args.p, args.k, args.r);
    let rep = match args.family {
        Experiment::Ex31 => {
            let ps = exponents(p_flag, cfg.p(), "1.5,2,4")?;
            let ks = to_u32(&list(k_flag, cfg.k(), geometric, ("8..256", true))?)?;
            ex31_sweep(&ks, &ps)?
        }
        Experiment::Ex32 => {
            let ps = exponents(p_flag, cfg.p(), "1,2")?;
            let ks = list(k_flag, cfg.k(), geometric, ("64..65536", true))?;
            ex32_sweep(&ks, &ps)?
        }
        Experiment::Prop34 => {
            let ps = exponents(p_flag, cfg.p(), "1,inf")?;
            let rs = to_u32(&list(r_flag, cfg.r(), geometric, ("4..12", false))?)?;
            let parts = ps.iter().map(|&p| Ok((p, prop34_sweep(b, &rs, p)?))).collect::<Result<Vec<_>>>()?;
            let merged = Reproduction::merge("prop34", seed, parts);
            let mut checks = merged.checks;
            let trials = args.trials.or(cfg.trials).unwrap_or(100);
            match seed {
                Some(master) if trials > 0 => {
                    let split = balanced_split_trials(trials, master)?;
                    checks.push(Check::new(
                        "balanced split",
                        split.violations.is_empty(),
                        format!(
                            "{} trials: {} splits found, {} degenerate, violations at {:?}",
                            split.trials, split.found, split.degenerate, split.violations
                        ),
                    ));
                }
                _ => eprintln!("note: balanced split trials skipped; pass --seed to run them"),
            }
            Reproduction::new("prop34", seed, merged.sweeps, checks)
        }
        Experiment::Thm35 => {
            let ps = exponents(p_flag, cfg.p(), "1,inf")?;
            let rs = to_u32(&list(r_flag, cfg.r(), geometric, ("2..10", false))?)?;
            let parts = ps.iter().map(|&p| Ok((p, thm35_sweep(b, &rs, p)?))).collect::<Result<Vec<_>>>()?;
            Reproduction::merge("thm35", None, parts)
        }
        Experiment::Flow => {
            let tol = tolerance(args.tolerance, cfg.tolerance)?;
            let trials = args.trials.or(cfg.trials).unwrap_or(500);
            let master = require_seed(seed, "reproduce flow")?;
            let mut rep = flow_suite(trials, master)?;
            rep.failures = inequality_failures(&rep.reports, tol);
            rep.to_reproduction()
        }
    };
    let family = rep.family.clone();
    let csv = write(&out, &format!("{family}.csv"), &rep.csv())?;
    let verdict = write(&out, &format!("{family}.verdict.json"), &rep.verdict_json())?;
    eprintln!("wrote {} and {}", csv.display(), verdict.display());
    for f in rep.failures() {
        eprintln!("failed: {f}");
    }
    println!("{family}: {}", rep.verdict);
    Ok(rep.passed())
}

fn load_graph(source: &GraphSource, seed: Option<u64>) -> Result<Graph> {
    if let Some(path) = &source.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(parse_edge_list(&text)?.0);
    }
    let spec = source.family.as_deref().expect("clap requires a graph source");
    let family: Family = spec.parse()?;
    let s = if family.is_random() { require_seed(seed, &format!("family {}", family.name()))? } else { 0 };
    Ok(generate(&family, s)?)
}

fn load_measure(path: Option<&Path>) -> Result<Measure> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(Measure::from_json(&text)?)
        }
        None => Ok(Measure::counting()),
    }
}

fn parse_ids(text: &str) -> Result<Vec<VertexId>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| usage(format!("bad vertex id {s:?}"))))
        .collect()
}

fn parse_region(g: &Graph, spec: &str) -> Result<Region> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok(classify_region(g, g.vertices())?);
    }
    if let Some(rest) = spec.strip_prefix("ball:") {
        let ids = parse_ids(rest)?;
        let [center, radius] = ids[..] else {
            return Err(usage(format!("expected ball:CENTER,RADIUS, got {spec:?}")));
        };
        return Ok(ball(g, center, radius)?);
    }
    if let Some(rest) = spec.strip_prefix("set:") {
        return Ok(classify_region(g, parse_ids(rest)?)?);
    }
    Err(usage(format!("region must be all, ball:CENTER,RADIUS or set:IDS, got {spec:?}")))
}

fn options(seed: u64, restarts: Option<usize>, iters: Option<usize>, cfg: &FileConfig) -> EstimateOptions {
    let d = EstimateOptions::default();
    EstimateOptions {
        seed,
        restarts: restarts.or(cfg.restarts).unwrap_or(d.restarts),
        iters: iters.or(cfg.iters).unwrap_or(d.iters),
    }
}

#[derive(Serialize)]
struct EstimateOutput {
    p: Exponent,
    region: RegionRecord,
    certified: bool,
    #[serde(flatten)]
    estimate: ConstantEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<String>,
}

pub fn estimate(args: EstimateArgs, config: Option<&Path>) -> Result<bool> {
    let mut cfg = FileConfig::load(config)?;
    let seed = require_seed(args.seed.or(cfg.seed), "estimate")?;
    let g = load_graph(&args.source, Some(seed))?;
    let m = load_measure(args.measure.as_deref())?;
    let e = parse_region(&g, &args.region)?;
    let ps = exponents(args.p, cfg.p(), "2")?;
    let [p] = ps[..] else { return Err(usage("estimate takes a single exponent")) };
    let opts = options(seed, args.restarts, args.iters, &cfg);
    let mut notice = None;
    let est = if p == Exponent::Finite(2.0) {
        match certify_constant_p2(&g, &e, &m, opts) {
            Ok(est) => est,
            Err(Error::Size { edges, limit }) => {
                let msg = format!("region has {edges} certifiable edges, more than {limit}; lower bound only");
                eprintln!("notice: {msg}");
                notice = Some(msg);
                estimate_constant(&g, &e, &m, p, opts)?
            }
            Err(err) => return Err(err.into()),
        }
    } else {
        estimate_constant(&g, &e, &m, p, opts)?
    };
    let out = EstimateOutput { p, region: e.record(), certified: est.upper.is_some(), estimate: est, notice };
    let text = pretty(&out);
    if let Some(dir) = args.out.or(cfg.out) {
        write(&dir, "estimate.json", &text)?;
    }
    print!("{text}");
    Ok(true)
}

pub fn sweep(args: SweepArgs, config: Option<&Path>) -> Result<bool> {
    let mut cfg = FileConfig::load(config)?;
    let seed = require_seed(args.seed.or(cfg.seed), "sweep")?;
    let tol = tolerance(args.tolerance, cfg.tolerance)?;
    let g = load_graph(&args.source, Some(seed))?;
    let m = load_measure(args.measure.as_deref())?;
    let alpha = m.alpha().ok_or_else(|| usage("the measure must declare a lower bound alpha"))?;
    let ps = exponents(args.p, cfg.p(), "2")?;
    let rs = to_u32(&list(args.r, cfg.r(), false, ("1..3", false))?)?;
    let opts = options(seed, args.restarts, args.iters, &cfg);
    let mut sweeps = Vec::new();
    for &p in &ps {
        let mut rows = Vec::new();
        let mut violations = Vec::new();
        for &r in &rs {
            let e = ball(&g, args.center, r)?;
            let est = estimate_constant(&g, &e, &m, p, opts)?;
            let bound = thm21_bound(&e, &m, alpha, p)?;
            if !numeric::le_rel(est.lower, bound, tol) {
                violations.push(r);
            }
            let ratio = if bound > 0.0 { est.lower / bound } else { 0.0 };
            rows.push(SweepRow { k: u64::from(r), lhs: est.lower, denominator: bound, normalized_ratio: ratio });
        }
        let ok = violations.is_empty();
        sweeps.push(SweepResult {
            family: "sweep".to_string(),
            p,
            rows,
            slope_fit: None,
            expected_slope: None,
            spread: None,
            checks: vec![Check::new(
                "lower <= bound",
                ok,
                format!("radii exceeding the bound at tolerance {tol}: {violations:?}"),
            )],
            verdict: if ok { "pass" } else { "fail" },
        });
    }
    let rep = Reproduction::new("sweep", Some(seed), sweeps, Vec::new());
    let out = args.out.or(cfg.out).unwrap_or_else(|| PathBuf::from("."));
    let csv = write(&out, "sweep.csv", &rep.csv())?;
    let verdict = write(&out, "sweep.verdict.json", &rep.verdict_json())?;
    eprintln!("wrote {} and {}", csv.display(), verdict.display());
    for f in rep.failures() {
        eprintln!("failed: {f}");
    }
    println!("sweep: {}", rep.verdict);
    Ok(rep.passed())
}
