//! Rooted trees, flow measures and triangles.
//!
//! A window of an infinite tree is oriented by a *top* vertex standing in for
//! the fixed half-infinite geodesic: every other vertex has its parent one
//! step closer to the top. Levels decrease away from the top, which sits at
//! level `depth`. Childless vertices form the frontier; the tree continues
//! below them outside the window.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Hypothesis, Result};
use crate::graph::{Graph, Region, VertexId, UNREACHED};
use crate::measure::{Measure, MeasureKind};
use crate::numeric;

#[derive(Debug, Clone)]
pub struct RootedTree {
    graph: Graph,
    top: VertexId,
    level: Vec<u32>,
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: u32,
}

/// Serialized form of a [`RootedTree`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTreeRecord {
    pub edges: Vec<(VertexId, VertexId)>,
    pub top: VertexId,
    pub frontier_level: u32,
}

/// Orients the tree `g` away from `top`.
pub fn root_tree(g: Graph, top: VertexId) -> Result<RootedTree> {
    g.check_vertex(top)?;
    if !g.is_acyclic() {
        return input("graph is not a tree");
    }
    let n = g.len();
    let dist = g.bfs(top, None);
    let mut parent = vec![None; n];
    let mut children = vec![Vec::new(); n];
    for x in g.vertices() {
        for &y in g.neighbors(x) {
            if dist[y as usize] + 1 == dist[x as usize] {
                parent[x as usize] = Some(y);
                children[y as usize].push(x);
            }
        }
    }
    let depth = dist.iter().copied().filter(|&d| d != UNREACHED).max().unwrap_or(0);
    let level = dist.iter().map(|&d| depth - d).collect();
    Ok(RootedTree { graph: g, top, level, parent, children, depth })
}

impl RootedTree {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn top(&self) -> VertexId {
        self.top
    }

    /// Number of levels below the top; the top has level `depth`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `ℓ(x)`.
    pub fn level(&self, x: VertexId) -> u32 {
        self.level[x as usize]
    }

    /// `p(x)`, undefined only at the top.
    pub fn parent(&self, x: VertexId) -> Option<VertexId> {
        self.parent[x as usize]
    }

    /// `s(x)`, sorted.
    pub fn children(&self, x: VertexId) -> &[VertexId] {
        &self.children[x as usize]
    }

    /// Whether `x` is on the frontier, i.e. its children lie outside the
    /// window.
    pub fn is_frontier(&self, x: VertexId) -> bool {
        self.children[x as usize].is_empty()
    }

    pub fn frontier(&self) -> Vec<VertexId> {
        self.graph.vertices().filter(|&x| self.is_frontier(x)).collect()
    }

    /// Distance from the top.
    pub fn height_below_top(&self, x: VertexId) -> u32 {
        self.depth - self.level(x)
    }

    /// `y ≥ x`: the parent chain from `x` reaches `y`.
    pub fn geq(&self, y: VertexId, x: VertexId) -> bool {
        let (ly, lx) = (self.level(y), self.level(x));
        if ly < lx {
            return false;
        }
        let mut z = x;
        for _ in 0..ly - lx {
            z = self.parent(z).expect("levels below the top have parents");
        }
        z == y
    }

    /// The subtree below `x0` truncated `height` levels down, by distance
    /// from `x0`.
    fn below(&self, x0: VertexId, height: u32) -> Vec<(VertexId, u32)> {
        let mut out = vec![(x0, 0)];
        let mut i = 0;
        while i < out.len() {
            let (x, d) = out[i];
            if d < height {
                out.extend(self.children(x).iter().map(|&c| (c, d + 1)));
            }
            i += 1;
        }
        out
    }

    pub fn record(&self) -> RootedTreeRecord {
        RootedTreeRecord { edges: self.graph.edges().collect(), top: self.top, frontier_level: 0 }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("tree record serializes")
    }
}

/// A measure satisfying Kirchhoff's law `μ(x) = Σ_{y ∈ s(x)} μ(y)` at every
/// non-frontier vertex of the window.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMeasure {
    measure: Measure,
}

impl FlowMeasure {
    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Largest relative Kirchhoff residual `|μ(x) − Σ μ(s(x))| / μ(x)` over
    /// the non-frontier vertices.
    pub fn kirchhoff_residual(&self, t: &RootedTree) -> f64 {
        t.graph()
            .vertices()
            .filter(|&x| !t.is_frontier(x))
            .map(|x| {
                let s = numeric::sum(t.children(x).iter().map(|&c| self.measure.weight(c)));
                let w = self.measure.weight(x);
                (w - s).abs() / w
            })
            .fold(0.0, f64::max)
    }
}

/// Builds the flow with the given values on the frontier by summing upward.
pub fn flow_from_leaves(t: &RootedTree, leaf_values: &BTreeMap<VertexId, f64>) -> Result<FlowMeasure> {
    let n = t.graph().len();
    let mut w = vec![0.0; n];
    for x in t.frontier() {
        let Some(&v) = leaf_values.get(&x) else {
            return input(format!("frontier vertex {x} has no leaf value"));
        };
        if !(v > 0.0 && v.is_finite()) {
            return input(format!("leaf value at {x} must be positive and finite, got {v}"));
        }
        w[x as usize] = v;
    }
    let mut order: Vec<VertexId> = t.graph().vertices().collect();
    order.sort_by_key(|&x| (t.level(x), x));
    for x in order {
        if !t.is_frontier(x) {
            w[x as usize] = numeric::sum(t.children(x).iter().map(|&c| w[c as usize]));
        }
    }
    let measure = Measure::with_kind(w, MeasureKind::Flow)?.unbounded_below().unbounded_above();
    Ok(FlowMeasure { measure })
}

/// Random leaf values uniform in `[lo, hi)`.
pub fn random_leaf_values<R: Rng>(t: &RootedTree, rng: &mut R, lo: f64, hi: f64) -> BTreeMap<VertexId, f64> {
    t.frontier().into_iter().map(|x| (x, rng.random_range(lo..hi))).collect()
}

/// Splits `total` from the top downwards with random proportions and returns
/// the resulting flow. The leaf values are drawn first, then summed upward.
pub fn flow_split_from_top<R: Rng>(t: &RootedTree, total: f64, rng: &mut R) -> Result<FlowMeasure> {
    let mut mass = vec![0.0; t.graph().len()];
    mass[t.top() as usize] = total;
    let mut queue = VecDeque::from([t.top()]);
    let mut leaves = BTreeMap::new();
    while let Some(x) = queue.pop_front() {
        let kids = t.children(x);
        if kids.is_empty() {
            leaves.insert(x, mass[x as usize]);
            continue;
        }
        let shares: Vec<f64> = kids.iter().map(|_| rng.random_range(0.1..1.0)).collect();
        let z: f64 = shares.iter().sum();
        for (&c, s) in kids.iter().zip(shares) {
            mass[c as usize] = mass[x as usize] * s / z;
            queue.push_back(c);
        }
    }
    flow_from_leaves(t, &leaves)
}

/// The triangle `T_0 = {x : d(x,x0) = d(x,y0) − 1 ≤ r}` with root edge
/// `[x0, y0]`, `y0 = p(x0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    pub root: VertexId,
    pub parent: VertexId,
    pub height: u32,
    /// Sorted.
    pub members: Vec<VertexId>,
    /// Members at distance exactly `height` from the root, sorted.
    pub base: Vec<VertexId>,
}

impl Triangle {
    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn mass(&self, m: &Measure) -> Result<f64> {
        m.mass(&self.members)
    }
}

pub fn triangle(t: &RootedTree, x0: VertexId, height: u32) -> Result<Triangle> {
    t.graph().check_vertex(x0)?;
    let Some(y0) = t.parent(x0) else {
        return input(format!("vertex {x0} is the top and roots no triangle"));
    };
    let below = t.below(x0, height);
    if let Some(&(x, d)) = below.iter().find(|&&(x, d)| d < height && t.is_frontier(x)) {
        return Err(Error::Window(format!(
            "triangle of height {height} below {x0} reaches frontier vertex {x} at depth {d}"
        )));
    }
    let mut members: Vec<VertexId> = below.iter().map(|&(x, _)| x).collect();
    let mut base: Vec<VertexId> = below.iter().filter(|&&(_, d)| d == height).map(|&(x, _)| x).collect();
    members.sort_unstable();
    base.sort_unstable();
    Ok(Triangle { root: x0, parent: y0, height, members, base })
}

/// Outcome of the triangle-splitting search.
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    /// `T_n` with `μ(T_n) ≤ 2 μ(T_0 ∖ T_n)`.
    Found { triangle: Triangle, n: u32, inner: f64, outer: f64 },
    /// No `n ≤ r` satisfies the stopping rule.
    Degenerate,
}

impl Split {
    /// Checks `μ(T') ≤ 2μ(T_0∖T')` and `μ(T_0∖T') ≤ (3/2)(b + β/α)μ(T')`.
    pub fn guarantees(&self, b: u32, alpha: f64, beta: f64) -> Option<(bool, bool)> {
        match self {
            Split::Found { inner, outer, .. } => Some((
                numeric::le_rel(*inner, 2.0 * outer, numeric::REL_TOL),
                numeric::le_rel(*outer, 1.5 * (f64::from(b) + beta / alpha) * inner, numeric::REL_TOL),
            )),
            Split::Degenerate => None,
        }
    }
}

/// Descends from `t0` into the heaviest child triangle (ties to the smallest
/// root id) until `μ(T_n) ≤ 2 μ(T_0 ∖ T_n)`.
pub fn balanced_split(t: &RootedTree, m: &Measure, t0: &Triangle) -> Result<Split> {
    if t0.height < 1 {
        return input("balanced split needs a triangle of height at least 1");
    }
    let mut current = t0.clone();
    for n in 1..=t0.height {
        let mut best: Option<(Triangle, f64)> = None;
        for &c in t.children(current.root) {
            let cand = triangle(t, c, t0.height - n)?;
            let w = cand.mass(m)?;
            if best.as_ref().is_none_or(|(_, bw)| w > *bw) {
                best = Some((cand, w));
            }
        }
        let Some((tn, inner)) = best else {
            return Err(Error::Window(format!("vertex {} has no children in the window", current.root)));
        };
        let rest: Vec<VertexId> = t0.members.iter().copied().filter(|&v| !tn.contains(v)).collect();
        let outer = m.mass(&rest)?;
        if inner <= 2.0 * outer {
            return Ok(Split::Found { triangle: tn, n, inner, outer });
        }
        current = tn;
    }
    Ok(Split::Degenerate)
}

/// `|{z ∈ E : z ≥ x}|`.
pub fn chain_count(t: &RootedTree, e: &Region, x: VertexId) -> Result<u32> {
    if !e.contains(x) {
        return input(format!("vertex {x} is not in the region"));
    }
    let mut count = 0;
    let mut z = Some(x);
    while let Some(y) = z {
        if e.contains(y) {
            count += 1;
        }
        z = t.parent(y);
    }
    Ok(count)
}

/// Both sides of `Σ_{E ∋ x ≤ z} μ(x) ≤ μ(z)·diam(E)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowMassCheck {
    pub lhs: f64,
    pub mu_z: f64,
    pub diam: u32,
    pub holds_with_diam: bool,
    pub holds_with_diam_plus_one: bool,
}

pub fn flow_mass_bound(t: &RootedTree, m: &FlowMeasure, e: &Region, z: VertexId) -> Result<FlowMassCheck> {
    if !e.contains(z) {
        return input(format!("vertex {z} is not in the region"));
    }
    if let Some(&x) = e.members().iter().find(|&&x| t.is_frontier(x)) {
        return Err(Error::Window(Hypothesis::FrontierTouched { vertex: x }.to_string()));
    }
    let below: Vec<VertexId> = e.members().iter().copied().filter(|&x| t.geq(z, x)).collect();
    let lhs = m.measure().mass(&below)?;
    let mu_z = m.measure().weight(z);
    let diam = e.diam();
    Ok(FlowMassCheck {
        lhs,
        mu_z,
        diam,
        holds_with_diam: numeric::le_rel(lhs, mu_z * f64::from(diam), numeric::REL_TOL),
        holds_with_diam_plus_one: numeric::le_rel(lhs, mu_z * f64::from(diam + 1), numeric::REL_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{classify_region, generate, Family, GraphBuilder, Label};

    fn path3() -> RootedTree {
        let g = generate(&Family::Path { n: 3 }, 0).unwrap();
        root_tree(g, 0).unwrap()
    }

    fn binary(depth: u32) -> RootedTree {
        // A rooted binary tree: the top has two children, as does every
        // vertex above the frontier.
        let mut b = GraphBuilder::new();
        let top = b.add_vertex(Label::Index(0), false);
        let mut level = vec![top];
        for d in 1..=depth {
            let mut next = Vec::new();
            for &p in &level {
                for _ in 0..2 {
                    let v = b.add_vertex(Label::Index(b.len() as u32), d < depth);
                    b.add_edge(p, v).unwrap();
                    next.push(v);
                }
            }
            level = next;
        }
        root_tree(b.ambient_tree(true).build().unwrap(), top).unwrap()
    }

    #[test]
    fn levels_on_a_path() {
        let t = path3();
        assert_eq!((t.level(0), t.level(1), t.level(2)), (2, 1, 0));
        assert_eq!(t.parent(2), Some(1));
        assert_eq!(t.parent(0), None);
        assert!(t.geq(0, 2) && !t.geq(2, 0) && t.geq(1, 1));
    }

    #[test]
    fn root_tree_rejects_cycles() {
        let g = generate(&Family::Cycle { n: 4 }, 0).unwrap();
        assert!(matches!(root_tree(g, 0), Err(Error::Input(_))));
    }

    #[test]
    fn binary_flow_doubles_per_level() {
        let t = binary(4);
        let leaves = t.frontier().into_iter().map(|x| (x, 1.0)).collect();
        let f = flow_from_leaves(&t, &leaves).unwrap();
        for x in t.graph().vertices() {
            assert_eq!(f.measure().weight(x), 2f64.powi(t.level(x) as i32));
        }
        assert_eq!(f.kirchhoff_residual(&t), 0.0);
        assert_eq!(t.children(0).len(), 2);
    }

    #[test]
    fn flow_rejects_bad_leaves() {
        let t = binary(2);
        let mut leaves: BTreeMap<_, _> = t.frontier().into_iter().map(|x| (x, 1.0)).collect();
        *leaves.values_mut().next().unwrap() = 0.0;
        assert!(flow_from_leaves(&t, &leaves).is_err());
        leaves.pop_first();
        assert!(flow_from_leaves(&t, &leaves).is_err());
    }

    #[test]
    fn triangle_sizes() {
        let t = binary(5);
        let x0 = t.children(0)[0];
        let tri = triangle(&t, x0, 2).unwrap();
        assert_eq!(tri.members.len(), 7);
        assert_eq!(tri.base.len(), 4);
        assert_eq!(triangle(&t, x0, 0).unwrap().members, vec![x0]);
        assert!(matches!(triangle(&t, x0, 5), Err(Error::Window(_))));
        assert!(triangle(&t, 0, 1).is_err());
    }

    #[test]
    fn balanced_split_on_binary_counting() {
        let t = binary(5);
        let x0 = t.children(0)[0];
        let t0 = triangle(&t, x0, 3).unwrap();
        let Split::Found { triangle: t1, n, inner, outer } =
            balanced_split(&t, &Measure::counting(), &t0).unwrap()
        else {
            panic!("binary split is never degenerate");
        };
        assert_eq!((n, inner, outer), (1, 7.0, 8.0));
        assert_eq!(t1.root, t.children(x0)[0]);
        assert!(t1.base.iter().all(|v| t0.base.contains(v)));
    }

    #[test]
    fn balanced_split_on_a_unary_triangle() {
        let g = generate(&Family::Path { n: 14 }, 0).unwrap();
        let t = root_tree(g, 0).unwrap();
        for r in 1..=10 {
            let t0 = triangle(&t, 1, r).unwrap();
            let Split::Found { n, inner, outer, .. } = balanced_split(&t, &Measure::counting(), &t0).unwrap() else {
                panic!("unary split found");
            };
            let expected = (1..=r).find(|&n| r - n + 1 <= 2 * n).unwrap();
            assert_eq!(n, expected);
            assert_eq!(inner, f64::from(r - n + 1));
            assert_eq!(outer, f64::from(n));
        }
    }

    #[test]
    fn chain_count_on_vertical_path() {
        let t = path3();
        let e = classify_region(t.graph(), [0, 1, 2]).unwrap();
        assert_eq!(chain_count(&t, &e, 2).unwrap(), 3);
        assert_eq!(chain_count(&t, &e, 0).unwrap(), 1);
        assert_eq!(e.diam(), 2);
        assert!(chain_count(&t, &classify_region(t.graph(), [1]).unwrap(), 2).is_err());
    }

    #[test]
    fn flow_mass_equality_case() {
        let t = binary(3);
        let leaves = t.frontier().into_iter().map(|x| (x, 1.0)).collect();
        let f = flow_from_leaves(&t, &leaves).unwrap();
        let z = t.children(0)[0];
        let mut members = vec![z];
        members.extend_from_slice(t.children(z));
        let e = classify_region(t.graph(), members).unwrap();
        let c = flow_mass_bound(&t, &f, &e, z).unwrap();
        assert_eq!(c.lhs, 2.0 * c.mu_z);
        assert!(c.holds_with_diam && c.holds_with_diam_plus_one);

        let single = classify_region(t.graph(), [z]).unwrap();
        let c = flow_mass_bound(&t, &f, &single, z).unwrap();
        assert!(!c.holds_with_diam && c.holds_with_diam_plus_one);
    }
}
