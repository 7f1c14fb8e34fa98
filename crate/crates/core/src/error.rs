use thiserror::Error;

use crate::graph::{Decision, EdgeKey, NodeId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {0} not found")]
    NodeNotFound(NodeId),
    #[error("invalid node pair ({0}, {0})")]
    InvalidPair(NodeId),
    #[error("edge {0} is not present in the overlay")]
    EdgeAbsent(EdgeKey),
    #[error("edge {0} is already present in the overlay")]
    EdgeExists(EdgeKey),
    #[error("edge {edge} already decided as {prior:?}, cannot record {attempted:?}")]
    DecisionConflict {
        edge: EdgeKey,
        prior: Decision,
        attempted: Decision,
    },
    #[error("edge {0} was retired earlier in this session and cannot return")]
    RetiredEdge(EdgeKey),
    #[error("known degree supplied for node {0} which was never queried")]
    ProvenanceViolation(NodeId),

    #[error("query budget of {budget} unique queries exhausted")]
    BudgetExhausted { budget: usize },
    #[error("capability unavailable: {0}")]
    CapabilityUnavailable(&'static str),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("node {0} has no neighbors")]
    IsolatedNode(NodeId),
    #[error("convergence monitor did not fire within {steps} steps")]
    ConvergenceTimeout { steps: u64 },
    #[error("walk did not cover every node within {steps} steps")]
    CoverageTimeout { steps: u64 },

    #[error("sequence of length {len} is too short for the diagnostic (need {min})")]
    SequenceTooShort { len: usize, min: usize },
    #[error("sequence has zero variance in both windows")]
    DegenerateSequence,
    #[error("cannot draw {m} neighbors from a node of degree {degree}")]
    SampleTooLarge { m: usize, degree: usize },
    #[error("sample set is empty")]
    EmptySample,
    #[error("attribute `{0}` missing from sample")]
    AttributeMissing(String),
    #[error("distributions disagree on support at index {0}")]
    SupportMismatch(usize),

    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has {nodes} nodes, limit is {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error("graph needs at least two nodes")]
    TooSmall,
    #[error("dense matrix-power budget exceeded")]
    ComputeBudget,

    #[error("value outside domain: {0}")]
    Domain(String),
    #[error("need at least 1000 trials, got {0}")]
    InsufficientTrials(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
