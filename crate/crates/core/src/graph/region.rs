use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Graph, VertexId, UNREACHED};
use crate::error::{input, Error, Result};

/// A pair of members whose induced distance exceeds `2 * diam`, or who are
/// not connected inside the region (`induced == None`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiconvexWitness {
    pub pair: (VertexId, VertexId),
    pub induced: Option<u32>,
}

/// A finite vertex set with its ambient diameter and shape predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    members: Vec<VertexId>,
    diam: u32,
    connected: bool,
    quasiconvex: bool,
    halo: Vec<VertexId>,
    witness: Option<QuasiconvexWitness>,
}

/// The serialized form of a [`Region`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub members: Vec<VertexId>,
    pub diam: u32,
    pub connected: bool,
    pub quasiconvex: bool,
}

impl Region {
    pub fn members(&self) -> &[VertexId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.members.binary_search(&v).ok()
    }

    /// Ambient diameter `max d(x, y)` over pairs of members.
    pub fn diam(&self) -> u32 {
        self.diam
    }

    /// `r = diam / 2`.
    pub fn half_diam(&self) -> f64 {
        f64::from(self.diam) / 2.0
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn is_quasiconvex(&self) -> bool {
        self.quasiconvex
    }

    /// Members together with all their neighbours, sorted.
    pub fn halo(&self) -> &[VertexId] {
        &self.halo
    }

    pub fn witness(&self) -> Option<QuasiconvexWitness> {
        self.witness
    }

    pub fn record(&self) -> RegionRecord {
        RegionRecord {
            members: self.members.clone(),
            diam: self.diam,
            connected: self.connected,
            quasiconvex: self.quasiconvex,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("region record serializes")
    }
}

/// The closed ball `B_radius(center)` as a region.
pub fn ball(g: &Graph, center: VertexId, radius: u32) -> Result<Region> {
    let members = g.ball_members(center, radius)?;
    let region = classify_region(g, members)?;
    debug_assert!(region.quasiconvex);
    Ok(region)
}

/// Computes ambient diameter, induced connectivity and quasiconvexity of
/// `members`.
///
/// Ambient distances come from breadth-first search in the window. A window
/// distance `d(x, y)` is exact when no incomplete vertex is closer to `x`
/// (or to `y`) than `d(x, y)`; otherwise the call fails with a window error.
/// On windows of trees every window path is the ambient one and the check
/// is skipped.
pub fn classify_region<I>(g: &Graph, members: I) -> Result<Region>
where
    I: IntoIterator<Item = VertexId>,
{
    let members: Vec<VertexId> = members.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    if members.is_empty() {
        return input("region must have at least one member");
    }
    for &v in &members {
        g.check_vertex(v)?;
        if !g.is_complete(v) {
            return Err(Error::Window(format!(
                "member {v} lies on the window boundary, so its neighbourhood is not fully represented"
            )));
        }
    }
    let halo: Vec<VertexId> = members
        .iter()
        .flat_map(|&v| std::iter::once(v).chain(g.neighbors(v).iter().copied()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut in_region = vec![false; g.len()];
    for &v in &members {
        in_region[v as usize] = true;
    }

    let induced_from = |s: VertexId| induced_bfs(g, &in_region, s);
    let first = induced_from(members[0]);
    let connected = members.iter().all(|&v| first[v as usize] != UNREACHED);

    let diam = if g.is_ambient_tree() && connected {
        // Induced paths inside a connected subtree are geodesics.
        let far = farthest(&members, &first);
        let from_far = induced_from(far);
        from_far[farthest(&members, &from_far) as usize]
    } else if g.is_ambient_tree() {
        members
            .iter()
            .map(|&x| {
                let d = g.bfs(x, None);
                members.iter().map(|&y| d[y as usize]).max().unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    } else {
        ambient_diameter(g, &members)?
    };

    let mut witness = None;
    if !connected {
        let y = *members
            .iter()
            .find(|&&v| first[v as usize] == UNREACHED)
            .expect("disconnected region has an unreached member");
        witness = Some(QuasiconvexWitness { pair: (members[0], y), induced: None });
    } else if !g.is_ambient_tree() {
        let mut worst: Option<(u32, VertexId, VertexId)> = None;
        for (i, &x) in members.iter().enumerate() {
            let d = if i == 0 { first.clone() } else { induced_from(x) };
            for &y in &members[i + 1..] {
                let dy = d[y as usize];
                if dy > 2 * diam && worst.is_none_or(|(w, _, _)| dy > w) {
                    worst = Some((dy, x, y));
                }
            }
        }
        witness = worst.map(|(d, x, y)| QuasiconvexWitness { pair: (x, y), induced: Some(d) });
    }

    Ok(Region {
        members,
        diam,
        connected,
        quasiconvex: connected && witness.is_none(),
        halo,
        witness,
    })
}

fn farthest(members: &[VertexId], dist: &[u32]) -> VertexId {
    let mut best = members[0];
    for &v in members {
        if dist[v as usize] > dist[best as usize] {
            best = v;
        }
    }
    best
}

fn induced_bfs(g: &Graph, in_region: &[bool], source: VertexId) -> Vec<u32> {
    let mut dist = vec![UNREACHED; g.len()];
    let mut queue = VecDeque::new();
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if in_region[y as usize] && dist[y as usize] == UNREACHED {
                dist[y as usize] = dist[x as usize] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Window BFS from `source` until every target is reached, returning the
/// distances and the smallest distance at which an incomplete vertex was met.
fn bfs_with_horizon(g: &Graph, source: VertexId, targets: &[VertexId]) -> (Vec<u32>, u32) {
    let mut dist = vec![UNREACHED; g.len()];
    let mut queue = VecDeque::new();
    let mut horizon = UNREACHED;
    let mut remaining = targets.len();
    dist[source as usize] = 0;
    queue.push_back(source);
    let mut stop_level = UNREACHED;
    while let Some(x) = queue.pop_front() {
        let dx = dist[x as usize];
        if dx > stop_level {
            break;
        }
        if !g.is_complete(x) && horizon == UNREACHED {
            horizon = dx;
        }
        if targets.binary_search(&x).is_ok() {
            remaining -= 1;
            if remaining == 0 {
                stop_level = dx;
            }
        }
        for &y in g.neighbors(x) {
            if dist[y as usize] == UNREACHED {
                dist[y as usize] = dx + 1;
                queue.push_back(y);
            }
        }
    }
    (dist, horizon)
}

fn ambient_diameter(g: &Graph, members: &[VertexId]) -> Result<u32> {
    let n = members.len();
    let mut table = vec![0u32; n * n];
    let mut horizon = vec![0u32; n];
    for (i, &x) in members.iter().enumerate() {
        let (d, h) = bfs_with_horizon(g, x, members);
        horizon[i] = h;
        for (j, &y) in members.iter().enumerate() {
            table[i * n + j] = d[y as usize];
        }
    }
    let mut diam = 0;
    for i in 0..n {
        for j in i + 1..n {
            let d = table[i * n + j];
            if d > horizon[i] && d > horizon[j] {
                return Err(Error::Window(format!(
                    "distance between {} and {} may use paths outside the window",
                    members[i], members[j]
                )));
            }
            diam = diam.max(d);
        }
    }
    Ok(diam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, Label};

    fn cycle(n: u32) -> Graph {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.add_vertex(Label::Index(i), true);
        }
        for i in 0..n {
            b.add_edge(i, (i + 1) % n).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn singleton_region() {
        let g = cycle(5);
        let r = classify_region(&g, [2]).unwrap();
        assert!(r.is_connected() && r.is_quasiconvex());
        assert_eq!(r.diam(), 0);
        assert_eq!(r.halo(), &[1, 2, 3]);
    }

    #[test]
    fn arc_of_long_cycle_is_not_quasiconvex() {
        let g = cycle(30);
        let r = classify_region(&g, 0..=27).unwrap();
        assert_eq!(r.diam(), 15);
        assert!(r.is_quasiconvex());

        let g = cycle(7);
        let r = classify_region(&g, [0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(r.diam(), 3);
        assert!(r.is_quasiconvex(), "5 <= 6");

        let r = classify_region(&g, [0, 2]).unwrap();
        assert!(!r.is_connected() && !r.is_quasiconvex());
        assert_eq!(r.witness().unwrap().induced, None);
    }

    #[test]
    fn empty_region_is_an_input_error() {
        let g = cycle(4);
        assert!(matches!(classify_region(&g, []), Err(Error::Input(_))));
    }

    #[test]
    fn ball_on_cycle() {
        let g = cycle(9);
        let b = ball(&g, 0, 2).unwrap();
        assert_eq!(b.members(), &[0, 1, 2, 7, 8]);
        assert_eq!(b.diam(), 4);
        assert_eq!(b.half_diam(), 2.0);
        assert!(b.is_quasiconvex());
        let json = b.to_json();
        let back: RegionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b.record());
    }
}
