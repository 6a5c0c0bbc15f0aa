//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgesuggest_core::graph::QueryNodeLabel;
use edgesuggest_core::harness::synth::{generate, SynthBenchmark, SynthConfig};
use edgesuggest_core::query::{LocalId, QueryEdge, QueryGraph, QueryNode, QuerySession};
use edgesuggest_core::vocab::{EdgeTypeId, NodeTypeId};
use edgesuggest_core::QueryLog;

/// The default synthetic benchmark.
pub fn benchmark() -> SynthBenchmark {
    generate(&SynthConfig::default()).expect("default config is valid")
}

/// The benchmark log plus a realistic mid-completion session: the first
/// `len` positive edges of the first logged session.
pub fn log_and_session(
    b: &SynthBenchmark,
    len: usize,
) -> (Arc<QueryLog>, QuerySession, Vec<EdgeTypeId>) {
    let log = Arc::new(b.log.clone());
    let session: QuerySession = log
        .session(0)
        .iter()
        .filter(|e| e.is_positive())
        .take(len)
        .copied()
        .collect();
    let candidates = (0..b.graph.edge_types().len() as u32)
        .map(EdgeTypeId)
        .filter(|&e| !session.mentions(e))
        .collect();
    (log, session, candidates)
}

/// Random transactions over `alphabet` items.
pub fn transactions(seed: u64, n: usize, alphabet: u32, density: f64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..alphabet).filter(|_| rng.random_bool(density)).collect())
        .collect()
}

/// Random query graph with `nodes` nodes over two labels and `edges` edges.
pub fn query_graph(seed: u64, nodes: u32, edges: usize) -> QueryGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns = (0..nodes)
        .map(|i| QueryNode {
            id: LocalId(i),
            label: QueryNodeLabel::Type(NodeTypeId(rng.random_range(0..2))),
        })
        .collect();
    let es = (0..edges)
        .map(|_| QueryEdge {
            src: LocalId(rng.random_range(0..nodes)),
            dst: LocalId(rng.random_range(0..nodes)),
            etype: EdgeTypeId(rng.random_range(0..3)),
        })
        .collect();
    QueryGraph::from_raw(ns, es)
}
