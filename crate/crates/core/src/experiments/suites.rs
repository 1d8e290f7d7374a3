//! Randomized suites for the local inequalities and ball growth on
//! bounded-degree graphs.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::flow::{grow_region, EXPONENTS};
use crate::calculus::VertexFunction;
use crate::engine::{check_inequality, PoincareReport, Theorem};
use crate::error::Result;
use crate::graph::{ball, classify_region, generate, Family, Graph, Region, VertexId};
use crate::measure::{ball_masses, doubling_constant, DoublingReport, Measure};
use crate::numeric;
use crate::seed;

/// Summary of a randomized suite; `failures` counts violated checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    pub failures: usize,
    pub seed: u64,
    pub skipped: usize,
    /// Largest `lhs/rhs` seen over non-trivial reports.
    pub max_lhs_over_rhs: f64,
    /// Ball-growth checks `|B_r| ≤ 3b^r` performed and violated.
    pub growth_checked: usize,
    pub growth_violations: usize,
    /// Doubling checks `D(R) ≤ 3(β/α)b^{2R}` performed and violated.
    pub doubling_checked: usize,
    pub doubling_violations: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<PoincareReport>,
}

impl SuiteReport {
    fn new(suite: &str, trials: usize, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            trials,
            failures: 0,
            seed,
            skipped: 0,
            max_lhs_over_rhs: 0.0,
            growth_checked: 0,
            growth_violations: 0,
            doubling_checked: 0,
            doubling_violations: 0,
            reports: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn absorb(&mut self, report: PoincareReport) {
        if !report.passed() {
            self.failures += 1;
        }
        if report.rhs > 0.0 {
            self.max_lhs_over_rhs = self.max_lhs_over_rhs.max(report.lhs / report.rhs);
        }
        self.reports.push(report);
    }
}

struct Instance {
    graph: Graph,
    b: u32,
    alpha: f64,
    beta: f64,
    measure: Measure,
}

fn instance<R: Rng>(rng: &mut R, graph_seed: u64, max_n: u32) -> Result<Instance> {
    let n = rng.random_range(10..=max_n);
    let b = rng.random_range(2..=4u32);
    let extra = rng.random_range(0..=n / 4);
    let graph = generate(&Family::RandomBoundedDegree { n, b, extra }, graph_seed)?;
    let alpha = rng.random_range(0.5..2.0);
    let beta = alpha * rng.random_range(1.0..10.0);
    let weights = (0..graph.len()).map(|_| rng.random_range(alpha..=beta)).collect();
    let measure = Measure::from_weights(weights)?.declare_alpha(alpha)?.declare_beta(beta)?;
    Ok(Instance { graph, b, alpha, beta, measure })
}

fn random_function<R: Rng>(g: &Graph, rng: &mut R) -> VertexFunction {
    let values: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    VertexFunction::from_fn(g.vertices(), |v| values[v as usize])
}

fn random_quasiconvex<R: Rng>(g: &Graph, rng: &mut R) -> Result<Option<Region>> {
    let start = rng.random_range(0..g.len() as VertexId);
    let target = rng.random_range(2..=30usize);
    let members = grow_region(|x| g.neighbors(x).to_vec(), |_| true, start, target, rng);
    let e = classify_region(g, members)?;
    Ok(e.is_quasiconvex().then_some(e))
}

/// Local inequality on quasiconvex sets: random bounded-degree graphs with at
/// most 400 vertices, `μ` with weights in `[α, 10α]`, random balls and grown
/// quasiconvex regions, random `f` and `p`.
pub fn thm21_suite(trials: usize, master: u64) -> Result<SuiteReport> {
    let outcomes: Vec<Option<PoincareReport>> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Option<PoincareReport>> {
            let trial_seed = seed::derive(master, i as u64);
            let mut rng = seed::rng(trial_seed);
            let inst = instance(&mut rng, trial_seed, 400)?;
            let g = &inst.graph;
            let e = if rng.random_bool(0.5) {
                let center = rng.random_range(0..g.len() as VertexId);
                Some(ball(g, center, rng.random_range(0..=3))?)
            } else {
                random_quasiconvex(g, &mut rng)?
            };
            let Some(e) = e else { return Ok(None) };
            let f = random_function(g, &mut rng);
            let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
            let report = check_inequality(g, &f, &e, &inst.measure, p, Theorem::Thm21 { alpha: inst.alpha })?;
            Ok(Some(report.with_seed(trial_seed)))
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::new("thm21", trials, master);
    for o in outcomes {
        match o {
            Some(r) => rep.absorb(r),
            None => rep.skipped += 1,
        }
    }
    Ok(rep)
}

fn growth_bound(b: u32, r: u32) -> f64 {
    3.0 * f64::from(b).powi(r as i32)
}

struct Cor23Trial {
    report: PoincareReport,
    growth: Vec<bool>,
    doubling: bool,
}

/// Local inequality with the explicit constant `P_p(R)`: balls of radius
/// `r ≤ R/2` on graphs of degree at most `b + 1` with `μ ∈ M_α^β`, plus the
/// ball-growth and doubling bounds at the sampled centre.
pub fn cor23_suite(trials: usize, master: u64) -> Result<SuiteReport> {
    let outcomes: Vec<Cor23Trial> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Cor23Trial> {
            let trial_seed = seed::derive(master, i as u64);
            let mut rng = seed::rng(trial_seed);
            let inst = instance(&mut rng, trial_seed, 300)?;
            let g = &inst.graph;
            let scale = rng.random_range(2..=6u32);
            let center = rng.random_range(0..g.len() as VertexId);
            let e = ball(g, center, rng.random_range(0..=scale / 2))?;
            let f = random_function(g, &mut rng);
            let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
            let theorem = Theorem::Cor23 { scale: f64::from(scale), alpha: inst.alpha, beta: inst.beta, b: inst.b };
            let report = check_inequality(g, &f, &e, &inst.measure, p, theorem)?.with_seed(trial_seed);
            let sizes = ball_masses(g, &Measure::counting(), center, scale)?;
            let growth = sizes.iter().enumerate().map(|(r, &s)| s <= growth_bound(inst.b, r as u32)).collect();
            let doubling = doubling_within_bound(g, &inst, scale, center)?;
            Ok(Cor23Trial { report, growth, doubling })
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::new("cor23", trials, master);
    for t in outcomes {
        rep.absorb(t.report);
        rep.growth_checked += t.growth.len();
        let bad = t.growth.iter().filter(|&&ok| !ok).count();
        rep.growth_violations += bad;
        rep.doubling_checked += 1;
        if !t.doubling {
            rep.doubling_violations += 1;
        }
        rep.failures += bad + usize::from(!t.doubling);
    }
    Ok(rep)
}

fn doubling_within_bound(g: &Graph, inst: &Instance, scale: u32, center: VertexId) -> Result<bool> {
    let d: DoublingReport = doubling_constant(g, &inst.measure, scale, &[center])?;
    let bound = DoublingReport::bound(inst.alpha, inst.beta, inst.b, scale);
    Ok(numeric::le_rel(d.d_of_r, bound, numeric::REL_TOL))
}

/// Ball growth `|B_r| ≤ 3b^r` and `D(R) ≤ 3(β/α)b^{2R}` at random centres.
pub fn doubling_suite(trials: usize, master: u64) -> Result<SuiteReport> {
    let outcomes: Vec<(usize, usize, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize, bool)> {
            let trial_seed = seed::derive(master, i as u64);
            let mut rng = seed::rng(trial_seed);
            let inst = instance(&mut rng, trial_seed, 400)?;
            let g = &inst.graph;
            let scale = rng.random_range(1..=4u32);
            let center = rng.random_range(0..g.len() as VertexId);
            let sizes = ball_masses(g, &Measure::counting(), center, 2 * scale)?;
            let bad = sizes.iter().enumerate().filter(|&(r, &s)| s > growth_bound(inst.b, r as u32)).count();
            Ok((sizes.len(), bad, doubling_within_bound(g, &inst, scale, center)?))
        })
        .collect::<Result<_>>()?;
    let mut rep = SuiteReport::new("doubling", trials, master);
    for (checked, bad, ok) in outcomes {
        rep.growth_checked += checked;
        rep.growth_violations += bad;
        rep.doubling_checked += 1;
        rep.doubling_violations += usize::from(!ok);
        rep.failures += bad + usize::from(!ok);
    }
    Ok(rep)
}
