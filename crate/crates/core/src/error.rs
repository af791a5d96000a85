use crate::graph::NodeId;

/// Unified error type for the engine.
///
/// Everything that can go wrong is either a malformed input (graph edits,
/// config files, parameter ranges) or a structural guard firing (size limits
/// on exhaustive enumeration, connectivity requirements). Arithmetic overflow
/// is deliberately *not* represented here: costs use checked 128-bit rationals
/// and a wrap aborts rather than producing a wrong sign.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("self-loops are not allowed (node {0})")]
    SelfLoop(NodeId),
    #[error("link ({0}, {1}) already exists")]
    DuplicateLink(NodeId, NodeId),
    #[error("link ({0}, {1}) does not exist")]
    MissingLink(NodeId, NodeId),
    #[error("{what} supports at most {max} nodes, got {got}")]
    SizeGuard {
        what: &'static str,
        max: usize,
        got: usize,
    },
    #[error("topology is disconnected: {0}")]
    Disconnected(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("inconsistent payment ledger: {0}")]
    InconsistentLedger(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
