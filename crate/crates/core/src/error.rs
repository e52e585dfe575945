use crate::graph::NodeId;
use thiserror::Error;

/// Errors produced by graph construction, solvers and file loaders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(NodeId, NodeId),

    #[error("edge {{{0}, {1}}} has non-positive weight {2}")]
    NonPositiveWeight(NodeId, NodeId, f64),

    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),

    #[error("graph is disconnected: node {0} is unreachable from the field node")]
    Disconnected(NodeId),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("the field node cannot be a leader")]
    FieldAsLeader,

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("message state does not match the graph's directed edges")]
    KeyMismatch,

    #[error("invalid replacement graph: {0}")]
    InvalidNewGraph(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("edge list {0} contains no edges")]
    EmptyGraph(String),

    #[error("keep set is empty")]
    EmptyKeepSet,

    #[error("node {0} has no community label")]
    MissingNode(NodeId),

    #[error("profiles cover different node sets ({0} vs {1} nodes)")]
    NodeSetMismatch(usize, usize),

    #[error("labels cover {0} nodes but the profiles cover {1}")]
    LabelMismatch(usize, usize),

    #[error("state is not a fixed point (one-step W residual {0:.3e})")]
    NotAFixedPoint(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
