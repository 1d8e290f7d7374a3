use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphBuilder, Label, VertexId};
use crate::error::{input, Error, Result};
use crate::seed;

const MAX_VERTICES: usize = 4_000_000;
const MAX_EDGES: usize = 24_000_000;

/// A graph family together with its size parameters.
///
/// The string form is `name:key=value,...`, for example
/// `homogeneous_tree:b=2,depth=3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Window `0..=j_max` by `k_min..=k_max` of the lattice `ℕ²` with the
    /// extra chords `(j1, k) ~ (j2, k)` for odd `k`, `j1, j2 <= k`,
    /// `|j1 - j2| >= 4`.
    GridChords { j_max: u32, k_min: u32, k_max: u32 },
    /// The integers `-k_max..=k_max` of `ℤ`.
    Line { k_max: u32 },
    /// Ball of radius `depth` in the tree where every vertex has degree `b + 1`.
    HomogeneousTree { b: u32, depth: u32 },
    /// Rooted tree grown level by level, each vertex receiving between 1 and
    /// `b` children, until `depth` levels or `max_vertices` vertices.
    RandomTree { b: u32, depth: u32, max_vertices: u32 },
    Cycle { n: u32 },
    Path { n: u32 },
    Star { leaves: u32 },
    Complete { n: u32 },
    /// Random spanning tree plus `extra` random edges, all degrees at most
    /// `b + 1`.
    RandomBoundedDegree { n: u32, b: u32, extra: u32 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::GridChords { .. } => "grid_chords",
            Family::Line { .. } => "line",
            Family::HomogeneousTree { .. } => "homogeneous_tree",
            Family::RandomTree { .. } => "random_tree",
            Family::Cycle { .. } => "cycle",
            Family::Path { .. } => "path",
            Family::Star { .. } => "star",
            Family::Complete { .. } => "complete",
            Family::RandomBoundedDegree { .. } => "random_bounded_degree",
        }
    }

    fn params(&self) -> Vec<(&'static str, u32)> {
        match *self {
            Family::GridChords { j_max, k_min, k_max } => {
                vec![("j_max", j_max), ("k_min", k_min), ("k_max", k_max)]
            }
            Family::Line { k_max } => vec![("k_max", k_max)],
            Family::HomogeneousTree { b, depth } => vec![("b", b), ("depth", depth)],
            Family::RandomTree { b, depth, max_vertices } => {
                vec![("b", b), ("depth", depth), ("max_vertices", max_vertices)]
            }
            Family::Cycle { n } | Family::Path { n } | Family::Complete { n } => vec![("n", n)],
            Family::Star { leaves } => vec![("leaves", leaves)],
            Family::RandomBoundedDegree { n, b, extra } => vec![("n", n), ("b", b), ("extra", extra)],
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, Family::RandomTree { .. } | Family::RandomBoundedDegree { .. })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())?;
        for (i, (k, v)) in self.params().into_iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("expected key=value, got {part:?}")))?;
            let v: u32 = v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("parameter {k} must be a nonnegative integer, got {v:?}")))?;
            kv.insert(k.trim().to_string(), v);
        }
        let mut take = |key: &str, default: Option<u32>| -> Result<u32> {
            kv.remove(key)
                .or(default)
                .ok_or_else(|| Error::Input(format!("family {name} needs parameter {key}")))
        };
        let family = match name.trim() {
            "grid_chords" => {
                let j_max = take("j_max", None)?;
                let k_max = take("k_max", None)?;
                Family::GridChords { j_max, k_min: take("k_min", Some(0))?, k_max }
            }
            "line" => Family::Line { k_max: take("k_max", None)? },
            "homogeneous_tree" => Family::HomogeneousTree { b: take("b", None)?, depth: take("depth", None)? },
            "random_tree" => Family::RandomTree {
                b: take("b", None)?,
                depth: take("depth", None)?,
                max_vertices: take("max_vertices", Some(4000))?,
            },
            "cycle" => Family::Cycle { n: take("n", None)? },
            "path" => Family::Path { n: take("n", None)? },
            "star" => Family::Star { leaves: take("leaves", None)? },
            "complete" => Family::Complete { n: take("n", None)? },
            "random_bounded_degree" => Family::RandomBoundedDegree {
                n: take("n", None)?,
                b: take("b", None)?,
                extra: take("extra", Some(0))?,
            },
            other => return input(format!("unknown graph family {other:?}")),
        };
        if let Some(k) = kv.keys().next() {
            return input(format!("family {name} has no parameter {k}"));
        }
        Ok(family)
    }
}

fn budget(vertices: u64, edges: u64) -> Result<()> {
    if vertices > MAX_VERTICES as u64 || edges > MAX_EDGES as u64 {
        return Err(Error::Budget(format!(
            "graph would have {vertices} vertices and {edges} edges; limits are {MAX_VERTICES} and {MAX_EDGES}"
        )));
    }
    Ok(())
}

/// Builds the window described by `family`. Deterministic for a fixed
/// `(family, seed)`; deterministic families ignore the seed.
pub fn generate(family: &Family, seed: u64) -> Result<Graph> {
    let g = match *family {
        Family::GridChords { j_max, k_min, k_max } => grid_chords(j_max, k_min, k_max)?,
        Family::Line { k_max } => line(k_max)?,
        Family::HomogeneousTree { b, depth } => homogeneous_tree(b, depth)?,
        Family::RandomTree { b, depth, max_vertices } => random_tree(b, depth, max_vertices, seed)?,
        Family::Cycle { n } => cycle(n)?,
        Family::Path { n } => path(n)?,
        Family::Star { leaves } => star(leaves)?,
        Family::Complete { n } => complete(n)?,
        Family::RandomBoundedDegree { n, b, extra } => random_bounded_degree(n, b, extra, seed)?,
    };
    Ok(g)
}

fn grid_chords(j_max: u32, k_min: u32, k_max: u32) -> Result<Graph> {
    if k_min > k_max || j_max < 1 {
        return input("grid_chords needs k_min <= k_max and j_max >= 1");
    }
    let cols = u64::from(j_max) + 1;
    let rows = u64::from(k_max - k_min) + 1;
    let chord_estimate: u64 = (k_min..=k_max)
        .filter(|k| k % 2 == 1)
        .map(|k| {
            let m = u64::from(k.min(j_max)) + 1;
            m * m / 2
        })
        .sum();
    budget(cols * rows, 2 * cols * rows + chord_estimate)?;

    let mut b = GraphBuilder::new();
    let id = |j: u32, k: u32| -> VertexId { ((k - k_min) as u64 * cols + j as u64) as VertexId };
    for k in k_min..=k_max {
        for j in 0..=j_max {
            let grid_inside = (k == 0 || k > k_min) && k < k_max && j < j_max;
            let chords_inside = k % 2 == 0 || j > k || k <= j_max;
            b.add_vertex(Label::Grid { j, k }, grid_inside && chords_inside);
        }
    }
    for k in k_min..=k_max {
        for j in 0..=j_max {
            if j < j_max {
                b.add_edge(id(j, k), id(j + 1, k))?;
            }
            if k < k_max {
                b.add_edge(id(j, k), id(j, k + 1))?;
            }
        }
        if k % 2 == 1 {
            let top = k.min(j_max);
            for j1 in 0..=top {
                for j2 in j1 + 4..=top {
                    b.add_edge(id(j1, k), id(j2, k))?;
                }
            }
        }
    }
    b.window_note(format!(
        "lattice N^2 with odd-row chords, columns 0..={j_max}, rows {k_min}..={k_max}"
    ))
    .build()
}

fn line(k_max: u32) -> Result<Graph> {
    if k_max < 1 {
        return input("line needs k_max >= 1");
    }
    budget(2 * u64::from(k_max) + 1, 2 * u64::from(k_max))?;
    let mut b = GraphBuilder::new();
    let lo = -i64::from(k_max);
    for j in lo..=i64::from(k_max) {
        b.add_vertex(Label::Integer(j), j.unsigned_abs() < u64::from(k_max));
    }
    for v in 1..b.len() as VertexId {
        b.add_edge(v - 1, v)?;
    }
    b.degree_bound(1)
        .ambient_tree(true)
        .window_note(format!("integers -{k_max}..={k_max} of Z"))
        .build()
}

fn homogeneous_tree(b: u32, depth: u32) -> Result<Graph> {
    if b < 1 {
        return input("homogeneous_tree needs b >= 1");
    }
    if depth < 1 {
        return input("homogeneous_tree needs depth >= 1");
    }
    let size = 1 + (b as u64 + 1) * (0..depth).map(|i| (b as u64).saturating_pow(i)).sum::<u64>();
    budget(size, size)?;
    let mut builder = GraphBuilder::new();
    let mut frontier = vec![builder.add_vertex(Label::Index(0), true)];
    for level in 1..=depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let children = if level == 1 { b + 1 } else { b };
            for _ in 0..children {
                let v = builder.add_vertex(Label::Index(builder.len() as u32), level < depth);
                builder.add_edge(parent, v)?;
                next.push(v);
            }
        }
        frontier = next;
    }
    builder
        .degree_bound(b)
        .ambient_tree(true)
        .window_note(format!("ball of radius {depth} about vertex 0 in the {}-regular tree", b + 1))
        .build()
}

fn random_tree(b: u32, depth: u32, max_vertices: u32, seed: u64) -> Result<Graph> {
    if b < 1 {
        return input("random_tree needs b >= 1");
    }
    if depth < 1 || max_vertices < 2 {
        return input("random_tree needs depth >= 1 and max_vertices >= 2");
    }
    budget(u64::from(max_vertices), u64::from(max_vertices))?;
    let mut rng = seed::rng(seed);
    let mut builder = GraphBuilder::new();
    let mut frontier = vec![builder.add_vertex(Label::Index(0), false)];
    for _ in 0..depth {
        if builder.len() + frontier.len() > max_vertices as usize {
            break;
        }
        let mut next = Vec::new();
        for (i, &parent) in frontier.iter().enumerate() {
            let available = max_vertices as usize - builder.len();
            let waiting = frontier.len() - i - 1;
            let children = (rng.random_range(1..=b) as usize).min(available - waiting);
            for _ in 0..children {
                let v = builder.add_vertex(Label::Index(builder.len() as u32), false);
                builder.add_edge(parent, v)?;
                next.push(v);
            }
            if parent != 0 {
                builder.set_complete(parent, true);
            }
        }
        frontier = next;
    }
    builder
        .degree_bound(b)
        .ambient_tree(true)
        .window_note(format!(
            "random rooted tree, 1..={b} children per vertex, {depth} levels, at most {max_vertices} vertices; top and childless vertices are cut"
        ))
        .build()
}

fn cycle(n: u32) -> Result<Graph> {
    if n < 3 {
        return input("cycle needs n >= 3");
    }
    budget(u64::from(n), u64::from(n))?;
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(Label::Index(i), true);
    }
    for i in 0..n {
        b.add_edge(i, (i + 1) % n)?;
    }
    b.degree_bound(1).window_note(format!("cycle C_{n}")).build()
}

fn path(n: u32) -> Result<Graph> {
    if n < 2 {
        return input("path needs n >= 2");
    }
    budget(u64::from(n), u64::from(n))?;
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(Label::Index(i), true);
    }
    for i in 1..n {
        b.add_edge(i - 1, i)?;
    }
    b.degree_bound(1)
        .ambient_tree(true)
        .window_note(format!("finite path on {n} vertices"))
        .build()
}

fn star(leaves: u32) -> Result<Graph> {
    if leaves < 1 {
        return input("star needs leaves >= 1");
    }
    budget(u64::from(leaves) + 1, u64::from(leaves))?;
    let mut b = GraphBuilder::new();
    for i in 0..=leaves {
        b.add_vertex(Label::Index(i), true);
    }
    for i in 1..=leaves {
        b.add_edge(0, i)?;
    }
    b.degree_bound(leaves.saturating_sub(1).max(1))
        .ambient_tree(true)
        .window_note(format!("star K_1,{leaves}"))
        .build()
}

fn complete(n: u32) -> Result<Graph> {
    if n < 2 {
        return input("complete needs n >= 2");
    }
    budget(u64::from(n), u64::from(n) * u64::from(n))?;
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(Label::Index(i), true);
    }
    for u in 0..n {
        for v in u + 1..n {
            b.add_edge(u, v)?;
        }
    }
    b.degree_bound((n - 2).max(1))
        .ambient_tree(n == 2)
        .window_note(format!("complete graph K_{n}"))
        .build()
}

fn random_bounded_degree(n: u32, b: u32, extra: u32, seed: u64) -> Result<Graph> {
    if b < 1 {
        return input("random_bounded_degree needs b >= 1");
    }
    if n < 2 {
        return input("random_bounded_degree needs n >= 2");
    }
    budget(u64::from(n), u64::from(n) + u64::from(extra))?;
    let cap = b as usize + 1;
    let mut rng = seed::rng(seed);
    let mut builder = GraphBuilder::new();
    let mut degree = vec![0usize; n as usize];
    let mut open: Vec<VertexId> = Vec::new();
    for i in 0..n {
        let v = builder.add_vertex(Label::Index(i), true);
        if let Some(&u) = open.choose(&mut rng) {
            builder.add_edge(u, v)?;
            degree[u as usize] += 1;
            degree[v as usize] += 1;
            if degree[u as usize] == cap {
                open.retain(|&w| w != u);
            }
        }
        if degree[v as usize] < cap {
            open.push(v);
        }
    }
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < 50 * (extra + 1) {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || degree[u as usize] >= cap || degree[v as usize] >= cap {
            continue;
        }
        if builder.adj[u as usize].contains(&v) {
            continue;
        }
        builder.add_edge(u, v)?;
        degree[u as usize] += 1;
        degree[v as usize] += 1;
        added += 1;
    }
    builder
        .degree_bound(b)
        .ambient_tree(added == 0)
        .window_note(format!("random connected graph on {n} vertices, degree <= {}, {added} extra edges", b + 1))
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_vertex(g: &Graph, j: u32, k: u32) -> VertexId {
        g.vertex(&Label::Grid { j, k }).unwrap()
    }

    #[test]
    fn chord_rule() {
        let g = generate(&Family::GridChords { j_max: 12, k_min: 0, k_max: 8 }, 0).unwrap();
        assert!(g.has_edge(grid_vertex(&g, 0, 5), grid_vertex(&g, 4, 5)));
        assert!(!g.has_edge(grid_vertex(&g, 0, 4), grid_vertex(&g, 4, 4)));
        assert!(!g.has_edge(grid_vertex(&g, 0, 5), grid_vertex(&g, 3, 5)));
        assert!(!g.has_edge(grid_vertex(&g, 2, 5), grid_vertex(&g, 6, 5)), "j2 > k");
        assert!(g.is_complete(grid_vertex(&g, 0, 0)));
        assert!(!g.is_complete(grid_vertex(&g, 3, 8)));
        assert!(!g.is_complete(grid_vertex(&g, 12, 3)));
    }

    #[test]
    fn homogeneous_tree_degrees() {
        let g = generate(&Family::HomogeneousTree { b: 2, depth: 3 }, 0).unwrap();
        assert_eq!(g.len(), 1 + 3 + 6 + 12);
        for v in g.vertices() {
            if g.is_complete(v) {
                assert_eq!(g.degree(v), 3);
            } else {
                assert_eq!(g.degree(v), 1);
            }
        }
        assert_eq!(g.distances(0, 1).unwrap().len(), 4);
    }

    #[test]
    fn family_strings_round_trip() {
        for s in [
            "homogeneous_tree:b=2,depth=3",
            "grid_chords:j_max=13,k_min=5,k_max=11",
            "random_tree:b=3,depth=6,max_vertices=500",
            "random_bounded_degree:n=40,b=3,extra=10",
            "line:k_max=9",
        ] {
            let f: Family = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("moebius:n=3".parse::<Family>().is_err());
        assert!("cycle:n=3,m=2".parse::<Family>().is_err());
        assert!(generate(&"homogeneous_tree:b=0,depth=2".parse().unwrap(), 0).is_err());
    }

    #[test]
    fn random_families_are_seeded() {
        let f = Family::RandomBoundedDegree { n: 60, b: 3, extra: 20 };
        let a = generate(&f, 11).unwrap();
        let b = generate(&f, 11).unwrap();
        let c = generate(&f, 12).unwrap();
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
        assert!(a.max_degree() <= 4);

        let t = Family::RandomTree { b: 3, depth: 8, max_vertices: 300 };
        let g = generate(&t, 5).unwrap();
        assert!(g.len() <= 300);
        assert!(g.is_acyclic());
        assert!(g.max_degree() <= 4);
    }

    #[test]
    fn oversized_windows_hit_the_budget() {
        let err = generate(&Family::HomogeneousTree { b: 9, depth: 9 }, 0).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
    }
}
