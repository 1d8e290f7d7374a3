//! The integers with `μ(j) = 1/|j|`, a measure not bounded below on which
//! the local inequality fails for finite `p`.

use serde::Serialize;

use super::{Check, Reproduction, SweepResult, SweepRow};
use crate::calculus::{gradient, lp_norm, poincare_quotient, weighted_mean, Exponent, VertexFunction};
use crate::engine::fit_slope;
use crate::error::{input, Result};
use crate::graph::{classify_region, generate, Family, Graph, Label};
use crate::measure::{region_mass, Measure};
use crate::numeric;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `H_k` by direct summation.
pub fn harmonic(k: u64) -> f64 {
    numeric::sum((1..=k).rev().map(|j| 1.0 / j as f64))
}

/// `H_k` from the Euler–Maclaurin expansion, accurate to `1e-13` for `k ≥ 8`.
pub fn harmonic_closed_form(k: u64) -> f64 {
    let n = k as f64;
    let n2 = n * n;
    let tail = 1.0 / (2.0 * n) - 1.0 / (12.0 * n2) + 1.0 / (120.0 * n2 * n2) - 1.0 / (252.0 * n2 * n2 * n2)
        + 1.0 / (240.0 * n2 * n2 * n2 * n2)
        - 1.0 / (132.0 * n2.powi(5))
        + 691.0 / (32760.0 * n2.powi(6))
        - 1.0 / (12.0 * n2.powi(7));
    n.ln() + EULER_GAMMA + tail
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ex32Point {
    pub k: u64,
    pub p: Exponent,
    pub mean: f64,
    /// `‖f‖_{L^p(E_k,μ)}`.
    pub norm_f: f64,
    /// `Σ_{j=−k}^{k} |j|^{p−1}` with `0^0 = 1`, summed directly.
    /// At `p = 1` it counts `j = 0`, which `‖f‖_1 = 2k` does not.
    pub display_sum: f64,
    /// Its closed form, where one exists (`2k + 1` at `p = 1`, `k(k+1)` at `p = 2`).
    pub display_closed: Option<f64>,
    pub norm_grad: f64,
    pub norm_grad_closed: f64,
    pub mass: f64,
    pub mass_closed: f64,
    pub diam: u32,
    /// `‖f‖ / (μ(E)^{1/p} diam^{1−1/p} ‖∇f‖)`.
    pub normalized: f64,
    /// `normalized · (log k)^{2/p} / k^{1/p}`.
    pub scaled: f64,
}

fn line_measure(g: &Graph) -> Result<Measure> {
    let weights = g
        .vertices()
        .map(|v| match g.label(v) {
            Label::Integer(0) => 1.0,
            Label::Integer(j) => 1.0 / j.unsigned_abs() as f64,
            _ => unreachable!("integer labels"),
        })
        .collect();
    Ok(Measure::from_weights(weights)?.unbounded_below())
}

pub fn ex32_point(k: u64, p: Exponent) -> Result<Ex32Point> {
    let Exponent::Finite(q) = p else {
        return input("the example is stated for finite p only");
    };
    if k < 2 {
        return input(format!("need k >= 2, got {k}"));
    }
    let k32 = u32::try_from(k).map_err(|_| crate::Error::Budget(format!("k = {k} too large")))?;
    let g = generate(&Family::Line { k_max: k32 + 1 }, 0)?;
    let m = line_measure(&g)?;
    let members: Vec<u32> = (-(k as i64)..=k as i64)
        .map(|j| g.vertex(&Label::Integer(j)).expect("inside the window"))
        .collect();
    let e = classify_region(&g, members)?;
    let f = VertexFunction::from_fn(g.vertices(), |v| match g.label(v) {
        Label::Integer(j) => *j as f64,
        _ => unreachable!("integer labels"),
    });
    let quotient = poincare_quotient(&g, &f, &e, &m, p)?;
    let mass = region_mass(&m, &e)?;
    let h = harmonic_closed_form(k);
    let display_sum = numeric::sum(
        (-(k as i64)..=k as i64).map(|j| (j.unsigned_abs() as f64).powf(q - 1.0)),
    );
    let display_closed = if q == 1.0 {
        Some((2 * k + 1) as f64)
    } else if q == 2.0 {
        Some((k * (k + 1)) as f64)
    } else {
        None
    };
    let grad = gradient(&g, &f, &e)?;
    debug_assert!(grad.iter().all(|&v| v == 2.0));
    let diam = e.diam();
    let normalized =
        quotient.lhs / (mass.powf(1.0 / q) * f64::from(diam).powf(1.0 - 1.0 / q) * quotient.denominator);
    let kf = k as f64;
    Ok(Ex32Point {
        k,
        p,
        mean: weighted_mean(&f, &e, &m)?,
        norm_f: lp_norm(&f, &e, &m, p)?,
        display_sum,
        display_closed,
        norm_grad: quotient.denominator,
        norm_grad_closed: 2.0 * (1.0 + 2.0 * h).powf(1.0 / q),
        mass,
        mass_closed: 1.0 + 2.0 * h,
        diam,
        normalized,
        scaled: normalized * kf.ln().powf(2.0 / q) / kf.powf(1.0 / q),
    })
}

fn closed_form_checks(pt: &Ex32Point) -> Vec<Check> {
    let tag = format!("k={} p={}", pt.k, pt.p);
    let mut checks = vec![
        Check::new(format!("{tag}: mean"), pt.mean == 0.0, format!("f_E = {}", pt.mean)),
        Check::new(
            format!("{tag}: mass"),
            numeric::close_rel(pt.mass, pt.mass_closed, 1e-12),
            format!("μ(E_k) = {} vs 1 + 2H_k = {}", pt.mass, pt.mass_closed),
        ),
        Check::new(
            format!("{tag}: gradient norm"),
            numeric::close_rel(pt.norm_grad, pt.norm_grad_closed, 1e-12),
            format!("‖∇f‖ = {} vs 2(1 + 2H_k)^(1/p) = {}", pt.norm_grad, pt.norm_grad_closed),
        ),
    ];
    if let Some(c) = pt.display_closed {
        checks.push(Check::new(
            format!("{tag}: display sum"),
            numeric::close_rel(pt.display_sum, c, 1e-12),
            format!("Σ|j|^(p−1) = {} vs {c}", pt.display_sum),
        ));
    }
    checks
}

/// Normalized quotients on `E_k = [−k, k]` with `f(j) = j`. The verdict is
/// the bounded-ratio test on `normalized · (log k)^{2/p} / k^{1/p}`.
pub fn ex32_sweep(k_values: &[u64], p_values: &[Exponent]) -> Result<Reproduction> {
    let mut ks = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut checks = Vec::new();
    let mut sweeps = Vec::new();
    for &p in p_values {
        let points = ks.iter().map(|&k| ex32_point(k, p)).collect::<Result<Vec<_>>>()?;
        for pt in &points {
            checks.extend(closed_form_checks(pt));
        }
        let rows = points
            .iter()
            .map(|pt| SweepRow { k: pt.k, lhs: pt.norm_f, denominator: pt.norm_f / pt.normalized, normalized_ratio: pt.normalized })
            .collect();
        let mut s = SweepResult::new("ex32", p, rows);
        let scaled: Vec<f64> = points.iter().map(|pt| pt.scaled).collect();
        s.spread_check("bounded ratio", &scaled);
        if points.len() >= 4 {
            let pts: Vec<(f64, f64)> = points.iter().map(|pt| (pt.k as f64, pt.normalized)).collect();
            s.slope_fit = Some(fit_slope(&pts)?);
        }
        sweeps.push(s.finish());
    }
    Ok(Reproduction::new("ex32", None, sweeps, checks))
}
