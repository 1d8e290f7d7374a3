//! Extremal functions on balls of trees and the balanced triangle split.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Check, Reproduction, SweepResult, SweepRow};
use crate::calculus::{poincare_quotient, weighted_mean, Exponent, VertexFunction};
use crate::engine::fit_line;
use crate::error::{input, Result};
use crate::graph::{ball, generate, Family, Region, VertexId};
use crate::measure::{region_mass, Measure};
use crate::seed;
use crate::tree::{balanced_split, root_tree, triangle, RootedTree, Split, Triangle};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Prop34Outcome {
    Constructed {
        #[serde(skip)]
        function: VertexFunction,
        ratio: f64,
        lhs: f64,
        denominator: f64,
        mean: f64,
        mass: f64,
        /// The lower bound the construction guarantees: `r/(b+1)` at
        /// `p = ∞`, and for finite `p` the bound obtained from the split
        /// guarantees.
        guaranteed: f64,
    },
    /// The split found no balanced subtriangle; the radius is too small.
    Degenerate,
}

/// `f(x) = f(y)` for every halo vertex `x` outside `B` and its neighbour `y ∈ B`.
fn extend(t: &RootedTree, b: &Region, values: &[(VertexId, f64)]) -> VertexFunction {
    let mut f = VertexFunction::from_fn(b.members().iter().copied(), |_| 0.0);
    for &(v, x) in values {
        f.set(v, x);
    }
    for &x in b.halo() {
        if !b.contains(x) {
            let y = t.graph().neighbors(x).iter().copied().find(|&y| b.contains(y)).expect("halo vertex touches B");
            f.set(x, f.get(y).expect("defined on B"));
        }
    }
    f
}

fn depth_from(t: &RootedTree, tri: &Triangle, v: VertexId) -> f64 {
    f64::from(t.level(tri.root) - t.level(v) + 1)
}

/// Builds the extremal function of the optimality construction on the ball
/// `B_r(center)` of the tree `t` rooted at `center`.
///
/// `b`, `alpha` and `beta` are the degree and measure bounds the
/// construction's guarantees are stated with.
pub fn prop34_construct(
    t: &RootedTree,
    m: &Measure,
    r: u32,
    p: Exponent,
    b: u32,
    alpha: f64,
    beta: f64,
) -> Result<Prop34Outcome> {
    let center = t.top();
    if r < 1 {
        return input("the construction needs r >= 1");
    }
    let children = t.children(center);
    if children.len() < 2 {
        return input(format!("center {center} has fewer than two neighbours"));
    }
    let g = t.graph();
    let bl = ball(g, center, r)?;
    m.check_lower(alpha, bl.members())?;
    m.check_upper(beta, bl.members())?;
    let triangles = children.iter().map(|&c| triangle(t, c, r - 1)).collect::<Result<Vec<_>>>()?;
    let mut values = Vec::new();
    let guaranteed;
    match p {
        Exponent::Infinity => {
            let (t1, t2) = (&triangles[0], &triangles[1]);
            let moment = |tri: &Triangle| crate::numeric::sum(tri.members.iter().map(|&v| depth_from(t, tri, v) * m.weight(v)));
            let c = moment(t1) / moment(t2);
            values.extend(t1.members.iter().map(|&v| (v, depth_from(t, t1, v))));
            values.extend(t2.members.iter().map(|&v| (v, -c * depth_from(t, t2, v))));
            guaranteed = f64::from(r) / f64::from(b + 1);
        }
        Exponent::Finite(q) => {
            let masses = triangles.iter().map(|tri| tri.mass(m)).collect::<Result<Vec<_>>>()?;
            let j = (0..triangles.len()).fold(0, |best, i| if masses[i] > masses[best] { i } else { best });
            let tj = &triangles[j];
            if tj.height < 1 {
                return Ok(Prop34Outcome::Degenerate);
            }
            let Split::Found { triangle: tp, inner, outer, .. } = balanced_split(t, m, tj)? else {
                return Ok(Prop34Outcome::Degenerate);
            };
            let c = inner / outer;
            values.extend(tj.members.iter().map(|&v| (v, if tp.contains(v) { 1.0 } else { -c })));
            let mass_b = region_mass(m, &bl)?;
            let k = 1.5 * (f64::from(b) + beta / alpha);
            let inner_floor = ((mass_b - beta) / (f64::from(b + 1) * (1.0 + k))).max(0.0);
            guaranteed = inner_floor.powf(1.0 / q) / (3.0 * f64::from(b + 1) * (4.0 * beta).powf(1.0 / q));
        }
    }
    let f = extend(t, &bl, &values);
    let quotient = poincare_quotient(g, &f, &bl, m, p)?;
    Ok(Prop34Outcome::Constructed {
        ratio: quotient.ratio(),
        lhs: quotient.lhs,
        denominator: quotient.denominator,
        mean: weighted_mean(&f, &bl, m)?,
        mass: region_mass(m, &bl)?,
        guaranteed,
        function: f,
    })
}

fn homogeneous(b: u32, r: u32) -> Result<RootedTree> {
    root_tree(generate(&Family::HomogeneousTree { b, depth: r + 1 }, 0)?, 0)
}

/// The construction on the homogeneous tree of degree `b + 1` with counting
/// measure, centred at its root, for each radius.
///
/// At `p = ∞` every ratio must reach `r/(b+1)`; at `p = 1` the slope of
/// `log₂(ratio)` against `r` must be `1 ± 0.1` when `b = 2`; for every finite
/// `p` the constant `ratio/μ(B)^{1/p}` must stay above half its median.
pub fn prop34_sweep(b: u32, r_values: &[u32], p: Exponent) -> Result<Reproduction> {
    let mut rs = r_values.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut constants = Vec::new();
    let m = Measure::counting();
    for &r in &rs {
        let t = homogeneous(b, r)?;
        match prop34_construct(&t, &m, r, p, b, 1.0, 1.0)? {
            Prop34Outcome::Constructed { ratio, lhs, denominator, mean, mass, guaranteed, .. } => {
                let scale = lhs.max(1.0);
                checks.push(Check::new(format!("r={r}: mean"), mean.abs() <= 1e-9 * scale, format!("f_B = {mean}")));
                checks.push(Check::new(
                    format!("r={r}: lower bound"),
                    ratio >= guaranteed,
                    format!("ratio {ratio} >= guaranteed {guaranteed}"),
                ));
                constants.push(ratio / mass.powf(p.reciprocal()));
                rows.push(SweepRow { k: u64::from(r), lhs, denominator, normalized_ratio: ratio });
            }
            Prop34Outcome::Degenerate => {
                checks.push(Check::new(format!("r={r}: degenerate"), true, "no balanced split at this radius"));
            }
        }
    }
    let mut s = SweepResult::new("prop34", p, rows);
    if !p.is_infinite() && !constants.is_empty() {
        let mut sorted = constants.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let min = sorted[0];
        s.check(Check::new(
            "constant bounded away from zero",
            min >= 0.5 * median,
            format!("min ratio/μ(B)^(1/p) = {min}, median {median}"),
        ));
    }
    if p == Exponent::Finite(1.0) && s.rows.len() >= 4 {
        let pts: Vec<(f64, f64)> = s.rows.iter().map(|row| (row.k as f64, row.normalized_ratio.log2())).collect();
        let fit = fit_line(&pts)?;
        let expected = f64::from(b).log2();
        s.slope_fit = Some(fit);
        s.expected_slope = Some(expected);
        s.check(Check::new(
            "log2 slope",
            (fit.slope - expected).abs() <= 0.1,
            format!("slope {} (expected {expected} ± 0.1), r² {}", fit.slope, fit.r_squared),
        ));
    }
    Ok(Reproduction::new("prop34", None, vec![s.finish()], checks))
}

/// Outcome of [`balanced_split_trials`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitTrials {
    pub trials: usize,
    pub found: usize,
    pub degenerate: usize,
    /// Trials where a found split violates one of its guarantees.
    pub violations: Vec<usize>,
}

/// Runs the triangle split on seeded random triangles of homogeneous trees
/// with integer weights in `[1, 10]` and checks both guarantees.
pub fn balanced_split_trials(trials: usize, master: u64) -> Result<SplitTrials> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Option<bool>> {
            let mut rng = seed::rng(seed::derive(master, i as u64));
            let b = rng.random_range(1..=3u32);
            let depth = rng.random_range(4..=if b == 1 { 12 } else { 8 });
            let t = root_tree(generate(&Family::HomogeneousTree { b, depth }, 0)?, 0)?;
            let weights = (0..t.graph().len()).map(|_| f64::from(rng.random_range(1..=10u32))).collect();
            let m = Measure::from_weights(weights)?;
            let candidates: Vec<VertexId> = t.graph().vertices().filter(|&v| v != t.top() && t.level(v) >= 1).collect();
            let x0 = candidates[rng.random_range(0..candidates.len())];
            let height = rng.random_range(1..=t.level(x0));
            let t0 = triangle(&t, x0, height)?;
            let split = balanced_split(&t, &m, &t0)?;
            Ok(split.guarantees(b, 1.0, 10.0).map(|(a, c)| a && c))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SplitTrials { trials, found: 0, degenerate: 0, violations: Vec::new() };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Some(ok) => {
                report.found += 1;
                if !ok {
                    report.violations.push(i);
                }
            }
            None => report.degenerate += 1,
        }
    }
    Ok(report)
}
