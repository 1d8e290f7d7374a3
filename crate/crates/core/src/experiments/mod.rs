//! Reproductions of the counterexamples and optimality constructions, with
//! the randomized suites.
//!
//! Every experiment is a pure function of its parameters and master seed.
//! Results carry their own CSV rows and a verdict document.

mod ex31;
mod ex32;
mod flow;
mod prop34;
mod suites;
mod thm35;

use std::fmt::Write as _;

use serde::Serialize;

use crate::calculus::Exponent;
use crate::engine::SlopeFit;

pub use ex31::{ex31_point, ex31_sweep, Ex31Point};
pub use ex32::{ex32_point, ex32_sweep, harmonic, harmonic_closed_form, Ex32Point};
pub use flow::{flow_suite, FlowSuiteReport};
pub use prop34::{balanced_split_trials, prop34_construct, prop34_sweep, Prop34Outcome, SplitTrials};
pub use suites::{cor23_suite, doubling_suite, thm21_suite, SuiteReport};
pub use thm35::thm35_sweep;

/// Tolerance on fitted log-log slopes.
pub const SLOPE_TOL: f64 = 0.15;
/// Minimum fit quality for slope claims.
pub const MIN_R_SQUARED: f64 = 0.98;
/// Largest admissible max/min spread of a quantity claimed bounded.
pub const MAX_SPREAD: f64 = 4.0;

/// One named pass/fail condition with a human-readable detail line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    /// The sweep parameter (`k` or `r`).
    pub k: u64,
    pub lhs: f64,
    pub denominator: f64,
    pub normalized_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub family: String,
    pub p: Exponent,
    pub rows: Vec<SweepRow>,
    pub slope_fit: Option<SlopeFit>,
    pub expected_slope: Option<f64>,
    /// `max/min` of the quantity claimed bounded, when one is.
    pub spread: Option<f64>,
    pub checks: Vec<Check>,
    pub verdict: &'static str,
}

impl SweepResult {
    pub(crate) fn new(family: &str, p: Exponent, rows: Vec<SweepRow>) -> Self {
        SweepResult {
            family: family.to_string(),
            p,
            rows,
            slope_fit: None,
            expected_slope: None,
            spread: None,
            checks: Vec::new(),
            verdict: "pass",
        }
    }

    pub(crate) fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Sets the verdict from the recorded checks.
    pub(crate) fn finish(mut self) -> Self {
        self.verdict = if self.checks.iter().all(|c| c.passed) { "pass" } else { "fail" };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    /// Adds the log-log slope test `|slope − expected| ≤ 0.15`, `r² ≥ 0.98`.
    pub(crate) fn slope_check(&mut self, fit: SlopeFit, expected: f64, require_r2: bool) {
        self.slope_fit = Some(fit);
        self.expected_slope = Some(expected);
        let ok_slope = (fit.slope - expected).abs() <= SLOPE_TOL;
        let ok_r2 = !require_r2 || fit.r_squared >= MIN_R_SQUARED;
        self.check(Check::new(
            "slope",
            ok_slope && ok_r2,
            format!("slope {} (expected {expected} ± {SLOPE_TOL}), r² {}", fit.slope, fit.r_squared),
        ));
    }

    /// Adds the bounded-ratio test `max/min ≤ 4` over `values`.
    pub(crate) fn spread_check(&mut self, name: &str, values: &[f64]) {
        let s = spread(values);
        self.spread = Some(s);
        self.check(Check::new(name, s <= MAX_SPREAD, format!("max/min = {s} (limit {MAX_SPREAD})")));
    }
}

pub(crate) fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// A finished experiment: CSV rows for every sweep plus a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub family: String,
    pub seed: Option<u64>,
    pub sweeps: Vec<SweepResult>,
    pub checks: Vec<Check>,
    pub verdict: &'static str,
}

impl Reproduction {
    pub fn new(family: &str, seed: Option<u64>, sweeps: Vec<SweepResult>, checks: Vec<Check>) -> Self {
        let ok = sweeps.iter().all(SweepResult::passed) && checks.iter().all(|c| c.passed);
        Reproduction { family: family.to_string(), seed, sweeps, checks, verdict: if ok { "pass" } else { "fail" } }
    }

    /// Joins runs of one family over several exponents; checks are prefixed
    /// with their exponent.
    pub fn merge(family: &str, seed: Option<u64>, parts: Vec<(Exponent, Reproduction)>) -> Self {
        let mut sweeps = Vec::new();
        let mut checks = Vec::new();
        for (p, part) in parts {
            sweeps.extend(part.sweeps);
            checks.extend(part.checks.into_iter().map(|c| Check { name: format!("p={p}: {}", c.name), ..c }));
        }
        Reproduction::new(family, seed, sweeps, checks)
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    /// `k,p,lhs,denominator,normalized_ratio` with LF line endings.
    pub fn csv(&self) -> String {
        let mut out = String::from("k,p,lhs,denominator,normalized_ratio\n");
        for s in &self.sweeps {
            for r in &s.rows {
                writeln!(out, "{},{},{},{},{}", r.k, s.p, r.lhs, r.denominator, r.normalized_ratio).expect("string write");
            }
        }
        out
    }

    pub fn verdict_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdict serializes");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        for s in &self.sweeps {
            out.extend(s.checks.iter().filter(|c| !c.passed).map(|c| format!("p={}: {}", s.p, c.name)));
        }
        out
    }
}
