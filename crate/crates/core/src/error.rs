use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("edge references unknown node id `{0}`")]
    DanglingEndpoint(String),

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("node `{0}` is an atomic value; only entities are supported")]
    AtomicValue(String),

    #[error("unknown node id `{0}`")]
    UnknownNode(String),

    #[error("unknown node type `{0}`")]
    UnknownNodeType(String),

    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),

    #[error("unknown query node {0}")]
    UnknownLocalNode(u32),

    #[error("query graph is empty")]
    EmptyQueryGraph,

    #[error("query graph has a node waiting to be connected; only add_edge is allowed")]
    PendingConnection,

    #[error("edge type `{etype}` cannot connect {src} to {dst} under the schema")]
    SchemaIncompatible {
        etype: String,
        src: String,
        dst: String,
    },

    #[error("target query graph has no edges")]
    EdgelessTarget,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("query log is empty")]
    EmptyLog,

    #[error("candidate set is empty")]
    NoCandidates,

    #[error("no supporting sessions for the conditioning set")]
    NoSupport,

    #[error("session has {0} edges; exact expectation is limited to 6")]
    SessionTooLarge(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("session `{0}` is closed")]
    SessionClosed(String),

    #[error("no outstanding suggestions for session `{0}`")]
    NoOutstandingSuggestions(String),

    #[error("stale suggestion batch: expected version {expected}, got {got}")]
    StaleBatch { expected: u64, got: u64 },

    #[error("suggestion index {0} is out of range")]
    BadSuggestionIndex(usize),

    #[error("no possible relationship between the two nodes")]
    NoPossibleRelationship,

    #[error("unknown catalog parent `{0}`")]
    UnknownCatalogParent(String),

    #[error("replay diverged at step {step}: recorded `{recorded}`, ranker chose `{actual}`")]
    ReplayDivergence {
        step: usize,
        recorded: String,
        actual: String,
    },
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
