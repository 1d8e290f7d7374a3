//! Randomized trials of the global inequality for flow measures on trees.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Check, Reproduction, SweepResult, SweepRow};
use crate::calculus::{Exponent, VertexFunction};
use crate::engine::{check_inequality, PoincareReport, Theorem};
use crate::error::{Error, Result};
use crate::graph::{classify_region, generate, Family, Region, VertexId};
use crate::seed;
use crate::tree::{chain_count, flow_from_leaves, flow_mass_bound, random_leaf_values, root_tree, RootedTree};

pub(crate) const EXPONENTS: [Exponent; 5] = [
    Exponent::Finite(1.0),
    Exponent::Finite(1.5),
    Exponent::Finite(2.0),
    Exponent::Finite(3.0),
    Exponent::Infinity,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSuiteReport {
    pub trials: usize,
    pub seed: u64,
    pub reports: Vec<PoincareReport>,
    /// Trial index of each report.
    pub trial_index: Vec<usize>,
    /// Trials whose region could not be placed above the frontier.
    pub skipped: usize,
    pub failures: usize,
    /// Largest `chain_count − 2r` seen (the count may exceed `2r` by one).
    pub chain_max_excess: f64,
    pub chain_within_diam_plus_one: bool,
    /// Fraction of sampled vertices whose chain count is at most `2r`.
    pub chain_within_2r_rate: f64,
    pub flow_mass_within_diam_plus_one: bool,
    /// Fraction of sampled vertices where the flow-mass display holds with `diam(E)`.
    pub flow_mass_within_diam_rate: f64,
}

impl FlowSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.chain_within_diam_plus_one && self.flow_mass_within_diam_plus_one
    }

    /// One sweep per exponent with a row per trial (`k` = trial index,
    /// `lhs`, `rhs`, `lhs/rhs`).
    pub fn to_reproduction(&self) -> Reproduction {
        let mut sweeps = Vec::new();
        for p in EXPONENTS {
            let rows = self
                .reports
                .iter()
                .zip(&self.trial_index)
                .filter(|(r, _)| r.p == p)
                .map(|(r, &i)| SweepRow {
                    k: i as u64,
                    lhs: r.lhs,
                    denominator: r.rhs,
                    normalized_ratio: if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 },
                })
                .collect();
            sweeps.push(SweepResult::new("flow", p, rows).finish());
        }
        let checks = vec![
            Check::new("inequality", self.failures == 0, format!("{} of {} reports fail", self.failures, self.reports.len())),
            Check::new(
                "chain count",
                self.chain_within_diam_plus_one,
                format!("max excess over 2r: {}; within 2r at rate {}", self.chain_max_excess, self.chain_within_2r_rate),
            ),
            Check::new(
                "flow mass",
                self.flow_mass_within_diam_plus_one,
                format!("holds with diam(E) at rate {}", self.flow_mass_within_diam_rate),
            ),
        ];
        Reproduction::new("flow", Some(self.seed), sweeps, checks)
    }
}

/// Grows a connected region by seeded breadth-first search from `start`,
/// admitting only vertices accepted by `allowed`.
pub(crate) fn grow_region<R: Rng>(
    neighbors: impl Fn(VertexId) -> Vec<VertexId>,
    allowed: impl Fn(VertexId) -> bool,
    start: VertexId,
    target: usize,
    rng: &mut R,
) -> Vec<VertexId> {
    let mut members = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let mut nb = neighbors(x);
        nb.shuffle(rng);
        for y in nb {
            if members.len() >= target {
                return members.into_iter().collect();
            }
            if allowed(y) && members.insert(y) {
                queue.push_back(y);
            }
        }
    }
    members.into_iter().collect()
}

struct Trial {
    report: PoincareReport,
    chain: Vec<(u32, u32)>,
    mass: Vec<(bool, bool)>,
}

fn run_trial(master: u64, i: usize) -> Result<Option<Trial>> {
    let trial_seed = seed::derive(master, i as u64);
    let mut rng = seed::rng(trial_seed);
    let b = rng.random_range(1..=4u32);
    let depth = rng.random_range(3..=14u32);
    let g = generate(&Family::RandomTree { b, depth, max_vertices: 3000 }, trial_seed)?;
    let t: RootedTree = root_tree(g, 0)?;
    let leaves = random_leaf_values(&t, &mut rng, 0.1, 10.0);
    let flow = flow_from_leaves(&t, &leaves)?;
    let inner: Vec<VertexId> = t.graph().vertices().filter(|&v| v != t.top() && !t.is_frontier(v)).collect();
    if inner.is_empty() {
        return Ok(None);
    }
    let start = inner[rng.random_range(0..inner.len())];
    let target = rng.random_range(1..=40usize);
    let members = grow_region(
        |x| t.graph().neighbors(x).to_vec(),
        |y| y != t.top() && !t.is_frontier(y),
        start,
        target,
        &mut rng,
    );
    let e: Region = classify_region(t.graph(), members)?;
    let p = EXPONENTS[rng.random_range(0..EXPONENTS.len())];
    let mut halo = e.halo().to_vec();
    halo.sort_unstable();
    let f = if i % 10 == 0 {
        VertexFunction::from_fn(halo.iter().copied(), |_| 1.0)
    } else {
        let values: Vec<f64> = halo.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        VertexFunction::from_fn(halo.iter().copied(), |v| values[halo.binary_search(&v).expect("halo vertex")])
    };
    let report = match check_inequality(t.graph(), &f, &e, flow.measure(), p, Theorem::Thm41 { tree: &t }) {
        Ok(r) => r.with_seed(trial_seed),
        Err(Error::Precondition(_)) => return Ok(None),
        Err(err) => return Err(err),
    };
    let chain = e.members().iter().map(|&x| chain_count(&t, &e, x).map(|c| (c, e.diam()))).collect::<Result<_>>()?;
    let mass = e
        .members()
        .iter()
        .map(|&z| flow_mass_bound(&t, &flow, &e, z).map(|c| (c.holds_with_diam, c.holds_with_diam_plus_one)))
        .collect::<Result<_>>()?;
    Ok(Some(Trial { report, chain, mass }))
}

/// `trials` seeded instances of the flow inequality with constant `4r`,
/// with the chain-count and flow-mass side conditions of its proof.
pub fn flow_suite(trials: usize, master: u64) -> Result<FlowSuiteReport> {
    let outcomes: Vec<Option<Trial>> = (0..trials).into_par_iter().map(|i| run_trial(master, i)).collect::<Result<_>>()?;
    let mut rep = FlowSuiteReport {
        trials,
        seed: master,
        reports: Vec::new(),
        trial_index: Vec::new(),
        skipped: 0,
        failures: 0,
        chain_max_excess: f64::NEG_INFINITY,
        chain_within_diam_plus_one: true,
        chain_within_2r_rate: 1.0,
        flow_mass_within_diam_plus_one: true,
        flow_mass_within_diam_rate: 1.0,
    };
    let (mut chain_n, mut chain_ok, mut mass_n, mut mass_ok) = (0usize, 0usize, 0usize, 0usize);
    for (i, o) in outcomes.into_iter().enumerate() {
        let Some(trial) = o else {
            rep.skipped += 1;
            continue;
        };
        if !trial.report.passed() {
            rep.failures += 1;
        }
        for (count, diam) in trial.chain {
            chain_n += 1;
            chain_ok += usize::from(count <= diam);
            rep.chain_within_diam_plus_one &= count <= diam + 1;
            rep.chain_max_excess = rep.chain_max_excess.max(f64::from(count) - f64::from(diam));
        }
        for (with_diam, with_plus_one) in trial.mass {
            mass_n += 1;
            mass_ok += usize::from(with_diam);
            rep.flow_mass_within_diam_plus_one &= with_plus_one;
        }
        rep.reports.push(trial.report);
        rep.trial_index.push(i);
    }
    if chain_n > 0 {
        rep.chain_within_2r_rate = chain_ok as f64 / chain_n as f64;
    }
    if mass_n > 0 {
        rep.flow_mass_within_diam_rate = mass_ok as f64 / mass_n as f64;
    }
    if rep.chain_max_excess == f64::NEG_INFINITY {
        rep.chain_max_excess = 0.0;
    }
    Ok(rep)
}
