use alloc::string::String;
use alloc::vec::Vec;

use crate::network::{NetworkKind, NodeId, ValidationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("cycle detected through nodes {0:?}")]
    CycleDetected(Vec<NodeId>),
    #[error("operation requires a {expected} network, got {found}")]
    WrongKind {
        expected: NetworkKind,
        found: NetworkKind,
    },
    #[error("topological update order requested on a symmetric network")]
    PolicyMismatch,
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),
    #[error("network has {nodes} nodes, enumeration cap is {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown node label {0:?}")]
    UnknownLabel(String),
    #[error("distribution tables are over different node subsets")]
    SubsetMismatch,
    #[error("trace is constant; autocorrelation undefined")]
    ConstantTrace,
    #[error("ensemble mean never crossed the step threshold")]
    NotConverged,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
