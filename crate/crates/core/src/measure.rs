//! Vertex measures, the classes `M_α`, `M^β`, `M_α^β`, and doubling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Hypothesis, Result};
use crate::graph::{Graph, Region, VertexId};
use crate::numeric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Counting,
    Flow,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Uniform(f64),
    Table(Vec<f64>),
}

/// A strictly positive weight on vertices.
///
/// `alpha`/`beta` are the lower and upper bounds of the measure on the whole
/// represented graph. When the constructor knows them exactly they are
/// declared; otherwise they default to the infimum and supremum over the
/// window. A measure may also be declared unbounded, in which case the
/// corresponding bound is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Weights,
    alpha: Option<f64>,
    beta: Option<f64>,
    kind: MeasureKind,
}

/// Serialized form: `{weights: {id: w}, alpha, beta, kind}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub weights: BTreeMap<VertexId, f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kind: MeasureKind,
}

fn window_bounds(w: &[f64]) -> (f64, f64) {
    w.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

impl Measure {
    /// The counting measure `|·|`.
    pub fn counting() -> Self {
        Measure { weights: Weights::Uniform(1.0), alpha: Some(1.0), beta: Some(1.0), kind: MeasureKind::Counting }
    }

    /// Weight `c` at every vertex.
    pub fn uniform(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return input(format!("uniform weight must be positive and finite, got {c}"));
        }
        Ok(Measure { weights: Weights::Uniform(c), alpha: Some(c), beta: Some(c), kind: MeasureKind::Custom })
    }

    /// A measure given by one weight per vertex id of the window.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        Self::with_kind(weights, MeasureKind::Custom)
    }

    pub(crate) fn with_kind(weights: Vec<f64>, kind: MeasureKind) -> Result<Self> {
        if weights.is_empty() {
            return input("measure needs at least one weight");
        }
        if let Some((v, &w)) = weights.iter().enumerate().find(|(_, &w)| !(w > 0.0 && w.is_finite())) {
            return input(format!("weight at vertex {v} must be positive and finite, got {w}"));
        }
        let (lo, hi) = window_bounds(&weights);
        Ok(Measure { weights: Weights::Table(weights), alpha: Some(lo), beta: Some(hi), kind })
    }

    /// Declares the true lower bound `α` of the measure.
    pub fn declare_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return input(format!("alpha must be positive, got {alpha}"));
        }
        if let Some((v, w)) = self.first_below(alpha) {
            return Err(Error::Precondition(Hypothesis::BelowLowerBound { vertex: v, weight: w, alpha }));
        }
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// Declares the true upper bound `β` of the measure.
    pub fn declare_beta(mut self, beta: f64) -> Result<Self> {
        if let Some((v, w)) = self.first_above(beta) {
            return Err(Error::Precondition(Hypothesis::AboveUpperBound { vertex: v, weight: w, beta }));
        }
        self.beta = Some(beta);
        Ok(self)
    }

    /// Marks the measure as having infimum 0 on the represented graph.
    pub fn unbounded_below(mut self) -> Self {
        self.alpha = None;
        self
    }

    pub fn unbounded_above(mut self) -> Self {
        self.beta = None;
        self
    }

    /// The measure `c·μ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return input(format!("scale must be positive and finite, got {c}"));
        }
        let weights = match &self.weights {
            Weights::Uniform(w) => Weights::Uniform(w * c),
            Weights::Table(t) => Weights::Table(t.iter().map(|w| w * c).collect()),
        };
        Ok(Measure { weights, alpha: self.alpha.map(|a| a * c), beta: self.beta.map(|b| b * c), kind: self.kind })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Whether every vertex id of `g` carries a weight.
    pub fn covers(&self, g: &Graph) -> bool {
        match &self.weights {
            Weights::Uniform(_) => true,
            Weights::Table(t) => t.len() >= g.len(),
        }
    }

    pub fn try_weight(&self, v: VertexId) -> Result<f64> {
        match &self.weights {
            Weights::Uniform(w) => Ok(*w),
            Weights::Table(t) => t
                .get(v as usize)
                .copied()
                .ok_or_else(|| Error::Input(format!("measure has no weight at vertex {v}"))),
        }
    }

    /// Weight at `v`. Panics when `v` is outside the table; use
    /// [`Measure::try_weight`] for untrusted ids.
    pub fn weight(&self, v: VertexId) -> f64 {
        self.try_weight(v).expect("vertex inside the measure's table")
    }

    fn first_below(&self, alpha: f64) -> Option<(VertexId, f64)> {
        match &self.weights {
            Weights::Uniform(w) => (*w < alpha).then_some((0, *w)),
            Weights::Table(t) => t.iter().enumerate().find(|(_, &w)| w < alpha).map(|(v, &w)| (v as VertexId, w)),
        }
    }

    fn first_above(&self, beta: f64) -> Option<(VertexId, f64)> {
        match &self.weights {
            Weights::Uniform(w) => (*w > beta).then_some((0, *w)),
            Weights::Table(t) => t.iter().enumerate().find(|(_, &w)| w > beta).map(|(v, &w)| (v as VertexId, w)),
        }
    }

    /// Checks `μ ∈ M_α`: the measure is declared bounded below and no weight
    /// on `vertices` is below `alpha`.
    pub fn check_lower(&self, alpha: f64, vertices: &[VertexId]) -> Result<()> {
        let Some(a) = self.alpha else {
            return Err(Error::Precondition(Hypothesis::NotBoundedBelow));
        };
        if !(alpha > 0.0) || a < alpha {
            return Err(Error::Precondition(Hypothesis::BelowLowerBound { vertex: 0, weight: a, alpha }));
        }
        for &v in vertices {
            let w = self.try_weight(v)?;
            if w < alpha {
                return Err(Error::Precondition(Hypothesis::BelowLowerBound { vertex: v, weight: w, alpha }));
            }
        }
        Ok(())
    }

    /// Checks `μ ∈ M^β` on `vertices`.
    pub fn check_upper(&self, beta: f64, vertices: &[VertexId]) -> Result<()> {
        let Some(b) = self.beta else {
            return Err(Error::Precondition(Hypothesis::NotBoundedAbove));
        };
        if b > beta {
            return Err(Error::Precondition(Hypothesis::AboveUpperBound { vertex: 0, weight: b, beta }));
        }
        for &v in vertices {
            let w = self.try_weight(v)?;
            if w > beta {
                return Err(Error::Precondition(Hypothesis::AboveUpperBound { vertex: v, weight: w, beta }));
            }
        }
        Ok(())
    }

    /// `μ(S) = Σ_{x∈S} μ(x)` for an arbitrary vertex list.
    pub fn mass(&self, vertices: &[VertexId]) -> Result<f64> {
        match &self.weights {
            Weights::Uniform(w) => Ok(*w * vertices.len() as f64),
            Weights::Table(_) => {
                let mut ws = Vec::with_capacity(vertices.len());
                for &v in vertices {
                    ws.push(self.try_weight(v)?);
                }
                Ok(numeric::sum(ws))
            }
        }
    }

    pub fn record(&self) -> MeasureRecord {
        let weights = match &self.weights {
            Weights::Uniform(_) => BTreeMap::new(),
            Weights::Table(t) => t.iter().enumerate().map(|(v, &w)| (v as VertexId, w)).collect(),
        };
        MeasureRecord { weights, alpha: self.alpha, beta: self.beta, kind: self.kind }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("measure record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: MeasureRecord =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("measure JSON: {e}")))?;
        if rec.weights.is_empty() {
            return match rec.kind {
                MeasureKind::Counting => Ok(Measure::counting()),
                _ => input("measure JSON has no weights"),
            };
        }
        let n = *rec.weights.keys().last().expect("nonempty") as usize + 1;
        if rec.weights.len() != n {
            return input("measure JSON must give a weight for every id 0..n");
        }
        let mut m = Measure::with_kind(rec.weights.into_values().collect(), rec.kind)?;
        m.alpha = rec.alpha;
        m.beta = rec.beta;
        if let Some(a) = m.alpha {
            m = m.declare_alpha(a)?;
        }
        if let Some(b) = m.beta {
            m = m.declare_beta(b)?;
        }
        Ok(m)
    }
}

/// `μ(E)`.
pub fn region_mass(m: &Measure, e: &Region) -> Result<f64> {
    m.mass(e.members())
}

/// Empirical local doubling constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    pub r_max: u32,
    /// `max μ(B_{2r}(x)) / μ(B_r(x))` over the centers and `0 <= r <= r_max`.
    pub d_of_r: f64,
    /// The same maximum restricted to each single radius `r`.
    pub per_radius: Vec<f64>,
    pub centers_used: usize,
}

impl DoublingReport {
    /// The bound `(β/α)·3·b^{2R}` valid for `μ ∈ M_α^β` on graphs of degree
    /// at most `b + 1`.
    pub fn bound(alpha: f64, beta: f64, b: u32, r_max: u32) -> f64 {
        beta / alpha * 3.0 * f64::from(b).powi(2 * r_max as i32)
    }
}

/// Ball masses `μ(B_0(x)), …, μ(B_radius(x))`.
pub fn ball_masses(g: &Graph, m: &Measure, center: VertexId, radius: u32) -> Result<Vec<f64>> {
    let layers = g.ball_profile(center, radius)?;
    let mut out = Vec::with_capacity(layers.len());
    let mut acc = Vec::new();
    for layer in layers {
        acc.extend(layer);
        out.push(m.mass(&acc)?);
    }
    Ok(out)
}

pub fn doubling_constant(g: &Graph, m: &Measure, r_max: u32, centers: &[VertexId]) -> Result<DoublingReport> {
    if centers.is_empty() {
        return input("doubling constant needs at least one center");
    }
    let mut per_radius = vec![1.0f64; r_max as usize + 1];
    for &x in centers {
        let masses = ball_masses(g, m, x, 2 * r_max)?;
        for r in 0..=r_max as usize {
            let ratio = masses[2 * r] / masses[r];
            per_radius[r] = per_radius[r].max(ratio);
        }
    }
    let d_of_r = per_radius.iter().copied().fold(1.0, f64::max);
    Ok(DoublingReport { r_max, d_of_r, per_radius, centers_used: centers.len() })
}

/// Outcome of the check `deg(x) + 1 = |B_1(x)| ≤ (β/α)·μ(B_1(x))/μ(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeDoublingReport {
    /// `None` when the measure lies in no class `M_α^β`.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub checked: usize,
    pub violations: Vec<VertexId>,
    pub max_degree_plus_one: usize,
    /// `max μ(B_1(x))/μ(x)` over the checked vertices.
    pub max_unit_ratio: f64,
    pub note: String,
}

/// Relates local doubling at unit scale to bounded degree on every complete
/// vertex of the window.
pub fn degree_doubling_relation(g: &Graph, m: &Measure) -> Result<DegreeDoublingReport> {
    let (alpha, beta) = (m.alpha(), m.beta());
    let mut report = DegreeDoublingReport {
        alpha,
        beta,
        checked: 0,
        violations: Vec::new(),
        max_degree_plus_one: 0,
        max_unit_ratio: 1.0,
        note: String::new(),
    };
    let (Some(a), Some(b)) = (alpha, beta) else {
        report.note = match alpha {
            None => "measure is not in M_alpha for any alpha > 0".into(),
            Some(_) => "measure is not in M^beta for any finite beta".into(),
        };
        return Ok(report);
    };
    for x in g.vertices().filter(|&x| g.is_complete(x)) {
        let mut ball = vec![x];
        ball.extend_from_slice(g.neighbors(x));
        let unit = m.mass(&ball)? / m.try_weight(x)?;
        let lhs = ball.len();
        report.checked += 1;
        report.max_degree_plus_one = report.max_degree_plus_one.max(lhs);
        report.max_unit_ratio = report.max_unit_ratio.max(unit);
        if !numeric::le_rel(lhs as f64, b / a * unit, numeric::REL_TOL) {
            report.violations.push(x);
        }
    }
    report.note = format!("deg(x)+1 <= (beta/alpha) mu(B_1(x))/mu(x) on {} vertices", report.checked);
    Ok(report)
}
