//! Edge-list serialization.
//!
//! ```text
//! # family=cycle:n=4 seed=0 margin=0
//! # incomplete=
//! 0 1
//! 1 2
//! ```
//!
//! The first comment line is the header; the optional `incomplete=` line
//! lists window-boundary vertices. Vertex ids are `0..n`, where `n` is one
//! more than the largest id that appears.

use std::fmt::Write as _;

use super::{Graph, GraphBuilder, Label, VertexId};
use crate::error::{input, Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeListHeader {
    pub family: Option<String>,
    pub seed: Option<u64>,
    pub margin: Option<u32>,
    pub degree_bound: Option<u32>,
    pub tree: bool,
}

pub fn write_edge_list(g: &Graph, header: &EdgeListHeader) -> String {
    let mut out = String::new();
    let family = header.family.as_deref().unwrap_or("custom");
    let _ = write!(
        out,
        "# family={} seed={} margin={}",
        family,
        header.seed.unwrap_or(0),
        header.margin.unwrap_or(0)
    );
    if let Some(b) = g.degree_bound() {
        let _ = write!(out, " degree_bound={b}");
    }
    if g.is_ambient_tree() {
        out.push_str(" tree=true");
    }
    out.push('\n');
    let incomplete: Vec<String> = g.vertices().filter(|&v| !g.is_complete(v)).map(|v| v.to_string()).collect();
    if !incomplete.is_empty() {
        let _ = writeln!(out, "# incomplete={}", incomplete.join(","));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Input(format!("header field {key} has invalid value {value:?}")))
}

pub fn parse_edge_list(text: &str) -> Result<(Graph, EdgeListHeader)> {
    let mut header = EdgeListHeader::default();
    let mut incomplete = Vec::new();
    let mut edges = Vec::new();
    let mut n: u32 = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for token in comment.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else { continue };
                match key {
                    "family" => header.family = Some(value.to_string()),
                    "seed" => header.seed = Some(parse_field(key, value)?),
                    "margin" => header.margin = Some(parse_field(key, value)?),
                    "degree_bound" => header.degree_bound = Some(parse_field(key, value)?),
                    "tree" => header.tree = parse_field(key, value)?,
                    "incomplete" => {
                        for id in value.split(',').filter(|s| !s.is_empty()) {
                            incomplete.push(parse_field::<VertexId>(key, id)?);
                        }
                    }
                    _ => {}
                }
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return input(format!("line {}: expected \"u v\", got {line:?}", lineno + 1));
        };
        let u: VertexId = u
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad vertex id {u:?}", lineno + 1)))?;
        let v: VertexId = v
            .parse()
            .map_err(|_| Error::Input(format!("line {}: bad vertex id {v:?}", lineno + 1)))?;
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    let mut b = GraphBuilder::new();
    for i in 0..n {
        b.add_vertex(Label::Index(i), true);
    }
    for id in incomplete {
        if id >= n {
            return input(format!("incomplete vertex {id} has no edges"));
        }
        b.set_complete(id, false);
    }
    for (u, v) in edges {
        b.add_edge(u, v)?;
    }
    if let Some(d) = header.degree_bound {
        b = b.degree_bound(d);
    }
    let note = format!("read from edge list ({})", header.family.as_deref().unwrap_or("custom"));
    let g = b.ambient_tree(header.tree).window_note(note).build()?;
    Ok((g, header))
}
