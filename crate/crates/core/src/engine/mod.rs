//! Inequality verdicts and optimal-constant estimation.

mod certify;
mod estimate;
mod fit;
mod minnorm;

use serde::Serialize;

use crate::calculus::{poincare_quotient, Exponent, VertexFunction};
use crate::error::{input, Error, Hypothesis, Result};
use crate::graph::{Graph, Region, RegionRecord};
use crate::measure::{region_mass, Measure};
use crate::numeric;
use crate::tree::RootedTree;

pub use certify::{certify_constant_p2, CERTIFY_EDGE_LIMIT};
pub use estimate::{estimate_constant, EstimateOptions};
pub use fit::{fit_line, fit_slope, SlopeFit};

/// `(μ(E)/α)^{1/p} (4r)^{1−1/p}` with `r = diam(E)/2`.
pub fn thm21_bound(e: &Region, m: &Measure, alpha: f64, p: Exponent) -> Result<f64> {
    require_quasiconvex(e)?;
    m.check_lower(alpha, e.members())?;
    let mass = region_mass(m, e)?;
    let four_r = 2.0 * f64::from(e.diam());
    Ok((mass / alpha).powf(p.reciprocal()) * four_r.powf(1.0 - p.reciprocal()))
}

/// `P_p(R) = 4 (3 β b^R / (4α))^{1/p}`.
pub fn cor23_constant(scale: f64, alpha: f64, beta: f64, b: u32, p: Exponent) -> Result<f64> {
    if b < 1 {
        return input("degree parameter b must be at least 1");
    }
    if !(alpha > 0.0 && beta >= alpha && beta.is_finite()) {
        return input(format!("need 0 < alpha <= beta < inf, got alpha = {alpha}, beta = {beta}"));
    }
    if !(scale > 0.0) {
        return input(format!("scale R must be positive, got {scale}"));
    }
    let inner = 3.0 * beta * f64::from(b).powf(scale) / (4.0 * alpha);
    Ok(4.0 * inner.powf(p.reciprocal()))
}

/// `P_p(R)·r`, together with whether `r < 1`, the case the proof treats as
/// trivial.
pub fn cor23_bound(scale: f64, r: f64, alpha: f64, beta: f64, b: u32, p: Exponent) -> Result<(f64, bool)> {
    if r < 0.0 || 2.0 * r > scale {
        return input(format!("need 0 <= 2r <= R, got r = {r}, R = {scale}"));
    }
    Ok((cor23_constant(scale, alpha, beta, b, p)? * r, r < 1.0))
}

fn require_quasiconvex(e: &Region) -> Result<()> {
    if e.is_quasiconvex() {
        return Ok(());
    }
    if let Some(w) = e.witness() {
        return Err(Error::Precondition(Hypothesis::NotQuasiconvex {
            pair: w.pair,
            induced: w.induced,
            diam: e.diam(),
        }));
    }
    Err(Error::Precondition(Hypothesis::NotConnected))
}

/// Which inequality a check evaluates.
#[derive(Debug, Clone, Copy)]
pub enum Theorem<'a> {
    /// Local inequality on quasiconvex sets for `μ ∈ M_α`.
    Thm21 { alpha: f64 },
    /// Local inequality at scale `R` on graphs of degree `≤ b+1`, `μ ∈ M_α^β`.
    Cor23 { scale: f64, alpha: f64, beta: f64, b: u32 },
    /// Global inequality with constant 4 for flow measures on trees.
    Thm41 { tree: &'a RootedTree },
    /// `‖f − f_E‖ ≤ constant · ‖∇f‖`.
    Custom { constant: f64 },
}

impl Theorem<'_> {
    pub fn tag(&self) -> &'static str {
        match self {
            Theorem::Thm21 { .. } => "thm21",
            Theorem::Cor23 { .. } => "cor23",
            Theorem::Thm41 { .. } => "thm41",
            Theorem::Custom { .. } => "custom",
        }
    }
}

/// One inequality check. `verdict` is `"pass"` iff `lhs ≤ rhs·(1 + 1e-9)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareReport {
    pub theorem_tag: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub bound: f64,
    pub verdict: &'static str,
    pub seed: Option<u64>,
    pub region: RegionRecord,
    pub p: Exponent,
    /// Set when the bound is reached through a case the proof calls trivial.
    pub trivial: bool,
}

impl PoincareReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

const KIRCHHOFF_TOL: f64 = 1e-12;

fn check_flow(t: &RootedTree, m: &Measure, e: &Region) -> Result<()> {
    if t.graph().len() == 0 {
        return Err(Error::Precondition(Hypothesis::NotATree));
    }
    for &x in e.members() {
        if t.parent(x).is_none() {
            return Err(Error::Precondition(Hypothesis::TopInRegion { vertex: x }));
        }
        if t.is_frontier(x) {
            return Err(Error::Precondition(Hypothesis::FrontierTouched { vertex: x }));
        }
        let w = m.try_weight(x)?;
        let s = numeric::sum(t.children(x).iter().map(|&c| m.weight(c)));
        if (w - s).abs() > KIRCHHOFF_TOL * w {
            return Err(Error::Precondition(Hypothesis::NotAFlow { vertex: x, residual: w - s }));
        }
    }
    Ok(())
}

/// Evaluates both sides of the chosen inequality for `f` on `E`.
///
/// Hypotheses of the theorem are checked first; a mismatch is a
/// [`Error::Precondition`] naming the failed hypothesis.
pub fn check_inequality(
    g: &Graph,
    f: &VertexFunction,
    e: &Region,
    m: &Measure,
    p: Exponent,
    theorem: Theorem<'_>,
) -> Result<PoincareReport> {
    let mut trivial = false;
    let bound = match theorem {
        Theorem::Thm21 { alpha } => thm21_bound(e, m, alpha, p)?,
        Theorem::Cor23 { scale, alpha, beta, b } => {
            require_quasiconvex(e)?;
            if let Some(x) = g.vertices().find(|&x| g.degree(x) > b as usize + 1) {
                return Err(Error::Precondition(Hypothesis::DegreeExceedsBound {
                    vertex: x,
                    degree: g.degree(x),
                    bound: b,
                }));
            }
            if f64::from(e.diam()) > scale {
                return Err(Error::Precondition(Hypothesis::DiameterExceedsScale { diam: e.diam(), scale }));
            }
            m.check_lower(alpha, e.members())?;
            m.check_upper(beta, e.members())?;
            let (value, small) = cor23_bound(scale, e.half_diam(), alpha, beta, b, p)?;
            trivial = small;
            value
        }
        Theorem::Thm41 { tree } => {
            if !tree.graph().is_acyclic() {
                return Err(Error::Precondition(Hypothesis::NotATree));
            }
            if !e.is_connected() {
                return Err(Error::Precondition(Hypothesis::NotConnected));
            }
            check_flow(tree, m, e)?;
            2.0 * f64::from(e.diam())
        }
        Theorem::Custom { constant } => constant,
    };
    let q = poincare_quotient(g, f, e, m, p)?;
    let rhs = bound * q.denominator;
    let verdict = if numeric::le_rel(q.lhs, rhs, numeric::REL_TOL) { "pass" } else { "fail" };
    Ok(PoincareReport {
        theorem_tag: theorem.tag(),
        lhs: q.lhs,
        rhs,
        ratio: q.ratio(),
        bound,
        verdict,
        seed: None,
        region: e.record(),
        p,
        trivial,
    })
}

/// Bracket on the optimal constant `sup_f ‖f − f_E‖_p / ‖∇f‖_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimate {
    /// Attained by `witness`.
    pub lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub witness: VertexFunction,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Faces visited by the certifier, when it ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub faces: Option<usize>,
}
