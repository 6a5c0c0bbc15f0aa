//! Query graphs, query sessions, and the success metrics computed over them.

mod graph;
mod session;
pub mod similarity;

pub use graph::{LocalId, QueryEdge, QueryGraph, QueryNode};
pub use session::{QuerySession, Sign, SignedEdge};
pub use similarity::{conversion_rate, matched_edges, similarity};
