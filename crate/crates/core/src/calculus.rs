//! Vertex functions, gradient length, the tree difference operator, weighted
//! means and `L^p` norms over regions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::graph::{Graph, Region, VertexId};
use crate::measure::Measure;
use crate::numeric;
use crate::tree::RootedTree;

/// An exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            input(format!("exponent must lie in [1, inf], got {p}"))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero at infinity.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate `p'`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => Exponent::new(t.parse().map_err(|_| Error::Input(format!("bad exponent {s:?}")))?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

/// A real function on a finite set of vertices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction {
    values: BTreeMap<VertexId, f64>,
}

impl VertexFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_fn<I, F>(vertices: I, mut f: F) -> Self
    where
        I: IntoIterator<Item = VertexId>,
        F: FnMut(VertexId) -> f64,
    {
        VertexFunction { values: vertices.into_iter().map(|v| (v, f(v))).collect() }
    }

    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.values.get(&v).copied()
    }

    pub fn set(&mut self, v: VertexId, value: f64) {
        self.values.insert(v, value);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.values.iter().map(|(&v, &x)| (v, x))
    }

    /// `c·f + d`.
    pub fn affine(&self, c: f64, d: f64) -> Self {
        VertexFunction { values: self.values.iter().map(|(&v, &x)| (v, c * x + d)).collect() }
    }

    fn at(&self, v: VertexId) -> Result<f64> {
        self.get(v).ok_or(Error::Halo(v))
    }

    /// Values on the members of `e`, in member order.
    pub fn on(&self, e: &Region) -> Result<Vec<f64>> {
        e.members().iter().map(|&v| self.at(v)).collect()
    }
}

/// `∇f(x) = Σ_{y∼x} |f(x) − f(y)|` for every member, in member order.
pub fn gradient(g: &Graph, f: &VertexFunction, e: &Region) -> Result<Vec<f64>> {
    e.members()
        .iter()
        .map(|&x| {
            let fx = f.at(x)?;
            let mut terms = Vec::with_capacity(g.degree(x));
            for &y in g.neighbors(x) {
                terms.push((fx - f.at(y)?).abs());
            }
            Ok(numeric::sum(terms))
        })
        .collect()
}

/// `df(x) = f(x) − f(p(x))` for every member, in member order.
pub fn difference(t: &RootedTree, f: &VertexFunction, e: &Region) -> Result<Vec<f64>> {
    e.members()
        .iter()
        .map(|&x| {
            let Some(px) = t.parent(x) else {
                return input(format!("region contains the top vertex {x}, which has no parent"));
            };
            Ok(f.at(x)? - f.at(px)?)
        })
        .collect()
}

/// Weighted mean of `values` (aligned with `vertices`).
///
/// The sum is taken relative to the first value, so constant data give the
/// constant back exactly.
pub(crate) fn mean_of(values: &[f64], weights: &[f64]) -> f64 {
    let c = values[0];
    let num = numeric::sum(values.iter().zip(weights).map(|(v, w)| (v - c) * w));
    c + num / numeric::sum(weights.iter().copied())
}

/// `(Σ |v|^p w)^{1/p}`, or `max |v|` for `p = ∞`.
pub(crate) fn norm_of(values: &[f64], weights: &[f64], p: Exponent) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinity => scale,
        _ if scale == 0.0 => 0.0,
        Exponent::Finite(p) if p == 1.0 => numeric::sum(values.iter().zip(weights).map(|(v, w)| v.abs() * w)),
        Exponent::Finite(p) => {
            let s = numeric::sum(values.iter().zip(weights).map(|(v, w)| (v.abs() / scale).powf(p) * w));
            scale * s.powf(1.0 / p)
        }
    }
}

pub(crate) fn weights_on(m: &Measure, e: &Region) -> Result<Vec<f64>> {
    e.members().iter().map(|&v| m.try_weight(v)).collect()
}

/// `f_E = μ(E)^{-1} Σ_{x∈E} f(x) μ(x)`.
pub fn weighted_mean(f: &VertexFunction, e: &Region, m: &Measure) -> Result<f64> {
    Ok(mean_of(&f.on(e)?, &weights_on(m, e)?))
}

/// `‖f‖_{L^p(E,μ)}`; the `p = ∞` norm is the plain supremum over `E`.
pub fn lp_norm(f: &VertexFunction, e: &Region, m: &Measure, p: Exponent) -> Result<f64> {
    Ok(norm_of(&f.on(e)?, &weights_on(m, e)?, p))
}

/// The two sides `‖f − f_E‖_p` and `‖∇f‖_p` of a Poincaré quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quotient {
    pub lhs: f64,
    pub denominator: f64,
}

impl Quotient {
    /// `lhs / denominator`, with `0/0 = 0` and `x/0 = ∞`.
    pub fn ratio(self) -> f64 {
        if self.denominator > 0.0 {
            self.lhs / self.denominator
        } else if self.lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

pub(crate) fn quotient_of(values: &[f64], grad: &[f64], weights: &[f64], p: Exponent) -> Quotient {
    let mean = mean_of(values, weights);
    let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let constant = values.iter().all(|&v| v == values[0]);
    let lhs = if constant { 0.0 } else { norm_of(&centred, weights, p) };
    Quotient { lhs, denominator: norm_of(grad, weights, p) }
}

pub fn poincare_quotient(g: &Graph, f: &VertexFunction, e: &Region, m: &Measure, p: Exponent) -> Result<Quotient> {
    let values = f.on(e)?;
    let grad = gradient(g, f, e)?;
    let weights = weights_on(m, e)?;
    Ok(quotient_of(&values, &grad, &weights, p))
}

/// `‖f − f_E‖_{L^p(E,μ)} / ‖∇f‖_{L^p(E,μ)}`; constants give 0.
pub fn poincare_ratio(g: &Graph, f: &VertexFunction, e: &Region, m: &Measure, p: Exponent) -> Result<f64> {
    Ok(poincare_quotient(g, f, e, m, p)?.ratio())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{classify_region, generate, Family};
    use crate::tree::root_tree;

    fn edge() -> (Graph, Region) {
        let g = generate(&Family::Path { n: 2 }, 0).unwrap();
        let e = classify_region(&g, [0, 1]).unwrap();
        (g, e)
    }

    #[test]
    fn exponent_conjugates() {
        assert_eq!(Exponent::new(1.0).unwrap().conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert_eq!(Exponent::Finite(2.0).conjugate(), Exponent::Finite(2.0));
        assert_eq!(Exponent::Finite(3.0).conjugate().conjugate(), Exponent::Finite(3.0));
        assert!(Exponent::new(0.5).is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("1.5".parse::<Exponent>().unwrap().to_string(), "1.5");
    }

    #[test]
    fn single_edge_ratio_is_one_half() {
        let (g, e) = edge();
        let m = Measure::counting();
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let p = Exponent::new(p).unwrap();
            for (u, v) in [(1.0, -1.0), (3.0, 0.5), (-2.0, 7.0)] {
                let f = VertexFunction::from_fn([0, 1], |x| if x == 0 { u } else { v });
                assert_eq!(gradient(&g, &f, &e).unwrap(), vec![(u - v).abs(); 2]);
                assert!((poincare_ratio(&g, &f, &e, &m, p).unwrap() - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_have_ratio_zero() {
        let (g, e) = edge();
        let f = VertexFunction::from_fn([0, 1], |_| 4.25);
        assert_eq!(weighted_mean(&f, &e, &Measure::counting()).unwrap(), 4.25);
        assert_eq!(poincare_ratio(&g, &f, &e, &Measure::counting(), Exponent::Finite(2.0)).unwrap(), 0.0);
    }

    #[test]
    fn missing_halo_value_is_reported() {
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        let e = classify_region(&g, [0]).unwrap();
        let f = VertexFunction::from_fn([0], |_| 1.0);
        assert_eq!(gradient(&g, &f, &e), Err(Error::Halo(1)));
    }

    #[test]
    fn level_function_has_difference_minus_one() {
        let g = generate(&Family::Path { n: 5 }, 0).unwrap();
        let t = root_tree(g, 0).unwrap();
        let e = classify_region(t.graph(), [1, 2, 3]).unwrap();
        let f = VertexFunction::from_fn(t.graph().vertices(), |x| f64::from(t.level(x)));
        assert_eq!(difference(&t, &f, &e).unwrap(), vec![-1.0; 3]);
        let top = classify_region(t.graph(), [0, 1]).unwrap();
        assert!(difference(&t, &f, &top).is_err());
    }

    #[test]
    fn infinity_norm_ignores_the_measure() {
        let (_, e) = edge();
        let m = Measure::from_weights(vec![5.0, 0.25]).unwrap();
        let f = VertexFunction::from_fn([0, 1], |x| if x == 0 { -3.0 } else { 2.0 });
        assert_eq!(lp_norm(&f, &e, &m, Exponent::Infinity).unwrap(), 3.0);
        assert_eq!(lp_norm(&f, &e, &m, Exponent::Finite(1.0)).unwrap(), 15.5);
        assert_eq!(lp_norm(&VertexFunction::from_fn([0, 1], |_| 0.0), &e, &m, Exponent::Finite(2.0)).unwrap(), 0.0);
    }
}
