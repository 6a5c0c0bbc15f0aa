//! Edge suggestion for interactive graph query formulation.
//!
//! A user builds a query graph one edge at a time; the engine proposes
//! candidate edges that are valid under the data graph's schema and ranks
//! them using a log of past query sessions, including edges that users
//! explicitly rejected.

pub mod candidates;
pub mod error;
pub mod graph;
pub mod harness;
pub mod query;
pub mod querylog;
pub mod rank;
pub mod service;
pub mod vocab;

pub use candidates::{active_candidates, CandidateEdge, Endpoint};
pub use error::{Error, Result};
pub use graph::{
    DataGraph, DataGraphBuilder, Direction, PassiveCandidate, QueryNodeLabel, SchemaIndex,
};
pub use harness::{CompletionResult, Experiment, Instance};
pub use query::{LocalId, QueryGraph, QuerySession, Sign, SignedEdge};
pub use querylog::QueryLog;
pub use rank::{build_ranker, EdgeRanker, RankerConfig, RankerKind};
pub use service::{ApiCall, ApiResponse, ServiceConfig, SuggestionService};
pub use vocab::{EdgeTypeId, NodeIdx, NodeTypeId, Vocabulary};
