//! The grid with odd-row chords, where a non-quasiconvex row segment defeats
//! the local inequality.

use serde::Serialize;

use super::{Check, Reproduction, SweepResult, SweepRow};
use crate::calculus::{gradient, poincare_quotient, weighted_mean, Exponent, VertexFunction};
use crate::engine::fit_slope;
use crate::error::{input, Error, Result};
use crate::graph::{classify_region, generate, Family, Graph, Label, QuasiconvexWitness, Region};
use crate::measure::Measure;

/// Everything measured on `E_k = {(j, k) : 0 ≤ j ≤ k}` with `f(j, k) = j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ex31Point {
    pub k: u32,
    pub mean: f64,
    /// `∇f` along `E_k`, indexed by `j`.
    pub gradient: Vec<f64>,
    pub diam: u32,
    /// Diameter again on a window two rows and columns wider.
    pub diam_wider: u32,
    pub quasiconvex: bool,
    pub witness: Option<QuasiconvexWitness>,
    /// Witness endpoints as lattice points.
    pub witness_points: Option<((u32, u32), (u32, u32))>,
    pub size: usize,
}

fn window(k: u32, margin: u32) -> Result<Graph> {
    generate(&Family::GridChords { j_max: k + 3 + margin, k_min: k.saturating_sub(1 + margin), k_max: k + 1 + margin }, 0)
}

fn row(g: &Graph, k: u32) -> Result<Vec<u32>> {
    (0..=k)
        .map(|j| g.vertex(&Label::Grid { j, k }).ok_or_else(|| Error::Window(format!("({j}, {k}) outside window"))))
        .collect()
}

fn setup(k: u32) -> Result<(Graph, Region, VertexFunction)> {
    if k == 0 || k % 2 == 1 {
        return input(format!("E_k is defined for positive even k, got {k}"));
    }
    let g = window(k, 2)?;
    let e = classify_region(&g, row(&g, k)?)?;
    let f = VertexFunction::from_fn(g.vertices(), |v| match g.label(v) {
        Label::Grid { j, .. } => f64::from(*j),
        _ => unreachable!("grid labels"),
    });
    Ok((g, e, f))
}

pub fn ex31_point(k: u32) -> Result<Ex31Point> {
    let (g, e, f) = setup(k)?;
    let wider = window(k, 4)?;
    let diam_wider = classify_region(&wider, row(&wider, k)?)?.diam();
    let m = Measure::counting();
    let grid_of = |v: u32| match g.label(v) {
        Label::Grid { j, k } => (*j, *k),
        _ => unreachable!("grid labels"),
    };
    let witness = e.witness();
    Ok(Ex31Point {
        k,
        mean: weighted_mean(&f, &e, &m)?,
        gradient: gradient(&g, &f, &e)?,
        diam: e.diam(),
        diam_wider,
        quasiconvex: e.is_quasiconvex(),
        witness_points: witness.map(|w| (grid_of(w.pair.0), grid_of(w.pair.1))),
        witness,
        size: e.len(),
    })
}

fn exact_checks(pt: &Ex31Point, ratio_inf: f64) -> Vec<Check> {
    let k = pt.k;
    let twice_sum: u64 = (0..=u64::from(k)).sum::<u64>() * 2;
    let grad_ok = pt.gradient.iter().enumerate().all(|(j, &v)| v == if j == 0 { 1.0 } else { 2.0 });
    let mut checks = vec![
        Check::new(
            format!("k={k}: mean"),
            pt.mean == f64::from(k) / 2.0 && twice_sum == u64::from(k) * (u64::from(k) + 1),
            format!("f_E = {} (expected {})", pt.mean, f64::from(k) / 2.0),
        ),
        Check::new(format!("k={k}: gradient"), grad_ok, format!("∇f on E_k = {:?}", summarize(&pt.gradient))),
        Check::new(
            format!("k={k}: ratio at p=inf"),
            ratio_inf == f64::from(k) / 4.0,
            format!("ratio {ratio_inf} (expected {})", f64::from(k) / 4.0),
        ),
        Check::new(
            format!("k={k}: window stability"),
            pt.diam == pt.diam_wider,
            format!("diam {} vs {} on the wider window", pt.diam, pt.diam_wider),
        ),
    ];
    if k >= 8 {
        checks.push(Check::new(
            format!("k={k}: not quasiconvex"),
            !pt.quasiconvex && pt.witness.is_some(),
            format!("diam {}, witness {:?} induced {:?}", pt.diam, pt.witness_points, pt.witness.and_then(|w| w.induced)),
        ));
    }
    checks
}

fn summarize(values: &[f64]) -> String {
    if values.len() <= 4 {
        return format!("{values:?}");
    }
    format!("[{}, {}, .., {}]", values[0], values[1], values[values.len() - 1])
}

/// Normalized ratios `‖f − f_E‖ / (|E|^{1/p} diam^{1−1/p} ‖∇f‖)` for each
/// `p`, with slope `1 − 1/p` expected in `k`, plus the exact closed-form
/// checks at every `k`.
pub fn ex31_sweep(k_values: &[u32], p_values: &[Exponent]) -> Result<Reproduction> {
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut checks = Vec::new();
    let mut per_k = Vec::new();
    for &k in &ks {
        let (g, e, f) = setup(k)?;
        let pt = ex31_point(k)?;
        let ratio_inf = poincare_quotient(&g, &f, &e, &Measure::counting(), Exponent::Infinity)?.ratio();
        checks.extend(exact_checks(&pt, ratio_inf));
        let quotients = p_values
            .iter()
            .map(|&p| poincare_quotient(&g, &f, &e, &Measure::counting(), p))
            .collect::<Result<Vec<_>>>()?;
        per_k.push((k, e.len(), e.diam(), quotients));
    }

    let mut sweeps = Vec::new();
    for (i, &p) in p_values.iter().enumerate() {
        let rows: Vec<SweepRow> = per_k
            .iter()
            .map(|(k, size, diam, qs)| {
                let q = qs[i];
                let denominator = (*size as f64).powf(p.reciprocal()) * f64::from(*diam).powf(1.0 - p.reciprocal()) * q.denominator;
                SweepRow { k: u64::from(*k), lhs: q.lhs, denominator, normalized_ratio: q.lhs / denominator }
            })
            .collect();
        let mut s = SweepResult::new("ex31", p, rows);
        if s.rows.len() >= 4 {
            let pts: Vec<(f64, f64)> = s.rows.iter().map(|r| (r.k as f64, r.normalized_ratio)).collect();
            let expected = 1.0 - p.reciprocal();
            let fit = fit_slope(&pts)?;
            if expected == 0.0 {
                s.slope_check(fit, expected, false);
                let values: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
                s.spread_check("bounded ratio", &values);
            } else {
                s.slope_check(fit, expected, true);
            }
        }
        sweeps.push(s.finish());
    }
    Ok(Reproduction::new("ex31", None, sweeps, checks))
}
