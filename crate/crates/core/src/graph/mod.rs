//! Finite windows of infinite, locally finite, connected graphs.
//!
//! A [`Graph`] is a finite piece of a (possibly infinite) graph. Every vertex
//! carries a *complete* flag: a complete vertex has exactly the neighbours it
//! has in the represented graph, while an incomplete one sits on the edge of
//! the window and may be missing some. Metric queries check these flags and
//! refuse to answer when the window cannot guarantee an exact result.

mod generate;
mod io;
mod region;

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

pub use generate::{generate, Family};
pub use io::{parse_edge_list, write_edge_list, EdgeListHeader};
pub use region::{ball, classify_region, QuasiconvexWitness, Region, RegionRecord};

/// Opaque vertex identifier; ids are dense indices into the window.
pub type VertexId = u32;

pub(crate) const UNREACHED: u32 = u32::MAX;

/// Structured, family-specific name of a vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Index(u32),
    /// Lattice point `(j, k)` of the grid-with-chords family.
    Grid { j: u32, k: u32 },
    Integer(i64),
}

#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    complete: Vec<bool>,
    labels: Vec<Label>,
    by_label: HashMap<Label, VertexId>,
    degree_bound: Option<u32>,
    ambient_tree: bool,
    window_note: String,
}

#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    adj: Vec<Vec<VertexId>>,
    complete: Vec<bool>,
    labels: Vec<Label>,
    degree_bound: Option<u32>,
    ambient_tree: bool,
    window_note: String,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: Label, complete: bool) -> VertexId {
        let id = self.adj.len() as VertexId;
        self.adj.push(Vec::new());
        self.complete.push(complete);
        self.labels.push(label);
        id
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        let n = self.adj.len() as VertexId;
        if u >= n || v >= n {
            return input(format!("edge ({u}, {v}) refers to a missing vertex"));
        }
        if u == v {
            return input(format!("self-loop at vertex {u}"));
        }
        self.adj[u as usize].push(v);
        self.adj[v as usize].push(u);
        Ok(())
    }

    pub fn set_complete(&mut self, v: VertexId, complete: bool) {
        self.complete[v as usize] = complete;
    }

    /// Declares that the represented graph has degree at most `b + 1`.
    pub fn degree_bound(mut self, b: u32) -> Self {
        self.degree_bound = Some(b);
        self
    }

    /// Declares that the represented graph is a tree, so distances inside a
    /// connected window are exact.
    pub fn ambient_tree(mut self, yes: bool) -> Self {
        self.ambient_tree = yes;
        self
    }

    pub fn window_note(mut self, note: impl Into<String>) -> Self {
        self.window_note = note.into();
        self
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn build(mut self) -> Result<Graph> {
        let n = self.adj.len();
        if n < 2 {
            return input("a graph window needs at least two vertices");
        }
        for (v, list) in self.adj.iter_mut().enumerate() {
            list.sort_unstable();
            let before = list.len();
            list.dedup();
            if list.len() != before {
                return input(format!("duplicate edge at vertex {v}"));
            }
            if list.is_empty() {
                return input(format!("vertex {v} is isolated"));
            }
            if let Some(b) = self.degree_bound {
                if list.len() > b as usize + 1 {
                    return input(format!(
                        "vertex {v} has degree {} above the declared bound {}",
                        list.len(),
                        b + 1
                    ));
                }
            }
        }
        let mut by_label = HashMap::with_capacity(n);
        for (v, label) in self.labels.iter().enumerate() {
            if by_label.insert(label.clone(), v as VertexId).is_some() {
                return input(format!("label {label:?} used twice"));
            }
        }
        let g = Graph {
            adj: self.adj,
            complete: self.complete,
            labels: self.labels,
            by_label,
            degree_bound: self.degree_bound,
            ambient_tree: self.ambient_tree,
            window_note: self.window_note,
        };
        if g.bfs(0, None).iter().any(|&d| d == UNREACHED) {
            return input("graph window is not connected");
        }
        if g.ambient_tree && !g.is_acyclic() {
            return input("graph declared as a tree contains a cycle");
        }
        Ok(g)
    }
}

impl Graph {
    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        (v as usize) < self.adj.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.adj.len() as VertexId
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as VertexId;
            list.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    /// Whether `v` has all of its ambient neighbours inside the window.
    pub fn is_complete(&self, v: VertexId) -> bool {
        self.complete[v as usize]
    }

    pub fn label(&self, v: VertexId) -> &Label {
        &self.labels[v as usize]
    }

    pub fn vertex(&self, label: &Label) -> Option<VertexId> {
        self.by_label.get(label).copied()
    }

    /// The declared `b` such that every degree is at most `b + 1`.
    pub fn degree_bound(&self) -> Option<u32> {
        self.degree_bound
    }

    pub fn is_ambient_tree(&self) -> bool {
        self.ambient_tree
    }

    pub fn is_acyclic(&self) -> bool {
        self.edge_count() + 1 == self.len()
    }

    pub fn window_note(&self) -> &str {
        &self.window_note
    }

    pub(crate) fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            input(format!("vertex {v} is not in the graph"))
        }
    }

    /// Window breadth-first distances from `source`, optionally stopping at
    /// `limit`. Unreached vertices hold [`UNREACHED`].
    pub(crate) fn bfs(&self, source: VertexId, limit: Option<u32>) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            if limit.is_some_and(|l| dx >= l) {
                continue;
            }
            for &y in self.neighbors(x) {
                if dist[y as usize] == UNREACHED {
                    dist[y as usize] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Exact graph distances `d(source, y)` for every `y` with `d <= cutoff`.
    ///
    /// Fails with a window error when an incomplete vertex lies strictly
    /// inside the requested radius: the ball could then continue outside the
    /// window.
    pub fn distances(&self, source: VertexId, cutoff: u32) -> Result<BTreeMap<VertexId, u32>> {
        self.check_vertex(source)?;
        let dist = self.bfs(source, Some(cutoff));
        let mut out = BTreeMap::new();
        for (v, &d) in dist.iter().enumerate() {
            if d == UNREACHED {
                continue;
            }
            if d < cutoff && !self.complete[v] {
                return Err(Error::Window(format!(
                    "vertex {v} at distance {d} from {source} lies on the window boundary; radius {cutoff} needs it complete"
                )));
            }
            out.insert(v as VertexId, d);
        }
        Ok(out)
    }

    /// Vertices of the closed ball `B_radius(center)`, sorted. The halo
    /// requirement is enforced: every member must be complete.
    pub(crate) fn ball_members(&self, center: VertexId, radius: u32) -> Result<Vec<VertexId>> {
        let d = self.distances(center, radius.saturating_add(1))?;
        Ok(d.into_iter().filter(|&(_, dv)| dv <= radius).map(|(v, _)| v).collect())
    }

    /// Ball masses `μ(B_0(center)), …, μ(B_radius(center))` without a halo
    /// requirement.
    pub(crate) fn ball_profile(&self, center: VertexId, radius: u32) -> Result<Vec<Vec<VertexId>>> {
        let d = self.distances(center, radius)?;
        let mut layers = vec![Vec::new(); radius as usize + 1];
        for (v, dv) in d {
            layers[dv as usize].push(v);
        }
        Ok(layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Graph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_vertex(Label::Index(i), true);
        }
        for i in 1..n {
            b.add_edge(i - 1, i).unwrap();
        }
        b.ambient_tree(true).build().unwrap()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let g = path(5);
        for v in g.vertices() {
            assert_eq!(g.distances(v, 3).unwrap()[&v], 0);
        }
    }

    #[test]
    fn builder_rejects_bad_graphs() {
        let mut b = GraphBuilder::new();
        b.add_vertex(Label::Index(0), true);
        b.add_vertex(Label::Index(1), true);
        assert!(b.add_edge(0, 0).is_err());
        assert!(b.clone().build().is_err(), "isolated vertices");
        b.add_edge(0, 1).unwrap();
        b.add_edge(1, 0).unwrap();
        assert!(b.build().is_err(), "duplicate edge");

        let mut b = GraphBuilder::new();
        for i in 0..4 {
            b.add_vertex(Label::Index(i), true);
        }
        b.add_edge(0, 1).unwrap();
        b.add_edge(2, 3).unwrap();
        assert!(b.build().is_err(), "disconnected");
    }

    #[test]
    fn declared_degree_bound_is_enforced() {
        let mut b = GraphBuilder::new();
        for i in 0..4 {
            b.add_vertex(Label::Index(i), true);
        }
        for i in 1..4 {
            b.add_edge(0, i).unwrap();
        }
        assert!(b.clone().degree_bound(1).build().is_err());
        assert_eq!(b.degree_bound(2).build().unwrap().max_degree(), 3);
    }

    #[test]
    fn distances_refuse_to_cross_the_window_edge() {
        let mut b = GraphBuilder::new();
        for i in 0..5 {
            b.add_vertex(Label::Integer(i), i != 0 && i != 4);
        }
        for i in 1..5 {
            b.add_edge(i - 1, i).unwrap();
        }
        let g = b.build().unwrap();
        assert_eq!(g.distances(2, 2).unwrap().len(), 5);
        assert!(matches!(g.distances(2, 3), Err(Error::Window(_))));
        assert!(g.distances(9, 1).is_err());
    }
}
