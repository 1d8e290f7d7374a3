use std::fmt;

use crate::graph::VertexId;

/// A hypothesis of one of the inequality checks that an instance failed to meet.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// The region is not quasiconvex; `induced` is `None` when the pair is not
    /// connected inside the region at all.
    NotQuasiconvex {
        pair: (VertexId, VertexId),
        induced: Option<u32>,
        diam: u32,
    },
    NotConnected,
    /// Some weight on the region lies below the claimed lower bound.
    BelowLowerBound { vertex: VertexId, weight: f64, alpha: f64 },
    AboveUpperBound { vertex: VertexId, weight: f64, beta: f64 },
    /// The measure carries no positive lower bound at all.
    NotBoundedBelow,
    NotBoundedAbove,
    DegreeExceedsBound { vertex: VertexId, degree: usize, bound: u32 },
    DiameterExceedsScale { diam: u32, scale: f64 },
    NotATree,
    NotAFlow { vertex: VertexId, residual: f64 },
    FrontierTouched { vertex: VertexId },
    TopInRegion { vertex: VertexId },
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::NotQuasiconvex { pair, induced, diam } => match induced {
                Some(d) => write!(
                    f,
                    "region is not quasiconvex: vertices {} and {} are {} apart inside the region, more than 2*diam = {}",
                    pair.0,
                    pair.1,
                    d,
                    2 * diam
                ),
                None => write!(
                    f,
                    "region is not quasiconvex: vertices {} and {} are not connected inside the region",
                    pair.0, pair.1
                ),
            },
            Hypothesis::NotConnected => write!(f, "region is not connected"),
            Hypothesis::BelowLowerBound { vertex, weight, alpha } => write!(
                f,
                "measure is not bounded below by {alpha}: weight {weight} at vertex {vertex}"
            ),
            Hypothesis::AboveUpperBound { vertex, weight, beta } => write!(
                f,
                "measure is not bounded above by {beta}: weight {weight} at vertex {vertex}"
            ),
            Hypothesis::NotBoundedBelow => {
                write!(f, "measure has no positive lower bound")
            }
            Hypothesis::NotBoundedAbove => write!(f, "measure has no finite upper bound"),
            Hypothesis::DegreeExceedsBound { vertex, degree, bound } => write!(
                f,
                "vertex {vertex} has degree {degree}, above the bound {}",
                bound + 1
            ),
            Hypothesis::DiameterExceedsScale { diam, scale } => {
                write!(f, "region diameter {diam} exceeds the scale R = {scale}")
            }
            Hypothesis::NotATree => write!(f, "graph is not a tree"),
            Hypothesis::NotAFlow { vertex, residual } => write!(
                f,
                "measure violates conservation at vertex {vertex} (residual {residual})"
            ),
            Hypothesis::FrontierTouched { vertex } => write!(
                f,
                "region touches frontier vertex {vertex}, whose children lie outside the window"
            ),
            Hypothesis::TopInRegion { vertex } => {
                write!(f, "region contains the top vertex {vertex}, which has no parent")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    /// The finite window cannot guarantee the exactness a query needs.
    #[error("window too small: {0}")]
    Window(String),
    #[error("function is undefined at vertex {0}, which the gradient needs")]
    Halo(VertexId),
    #[error("hypothesis not satisfied: {0}")]
    Precondition(Hypothesis),
    #[error("certifier handles at most {limit} edges, region has {edges}; use the estimator instead")]
    Size { edges: usize, limit: usize },
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
