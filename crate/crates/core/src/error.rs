use alloc::string::String;

use crate::zxgraph::NodeId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {width}-qubit circuit")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("gate {gate} acts twice on qubit {qubit}")]
    RepeatedQubit { gate: &'static str, qubit: usize },
    #[error("gate {gate} expects {expected} qubit(s) and {params} angle(s)")]
    GateArity { gate: &'static str, expected: usize, params: usize },
    #[error("output bitstring has length {got}, circuit has {expected} qubits")]
    BitstringLength { got: usize, expected: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("nodes {0} and {1} are not adjacent")]
    NotAnEdge(NodeId, NodeId),
    #[error("diagram is not graph-like: {0}")]
    NotGraphLike(&'static str),
    #[error("diagram has {0} open boundary port(s)")]
    OpenBoundary(usize),
    #[error("brute-force evaluation refused: {size} exceeds the limit of {limit}")]
    OracleLimit { size: usize, limit: usize },
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("index {0} is dangling or unknown")]
    DanglingIndex(usize),
    #[error("invalid contraction plan: {0}")]
    InvalidPlan(String),
    #[error("value {0} outside the allowed domain")]
    Domain(f64),
}
