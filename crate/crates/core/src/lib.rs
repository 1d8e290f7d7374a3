//! Discrete L^p-Poincaré inequalities on infinite graphs and trees.
//!
//! Graphs are handled through finite windows ([`graph::Graph`]) that refuse
//! queries they cannot answer exactly. On top of them sit vertex measures,
//! rooted trees with flow measures, the discrete calculus (gradient length,
//! weighted means, `L^p` norms), the inequality engine and the experiment
//! sweeps.

pub mod calculus;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod measure;
pub mod numeric;
pub mod seed;
pub mod tree;

pub use error::{Error, Hypothesis, Result};
