//! Active-mode candidate edges: every edge type that could be attached to the
//! current query graph, materialized with its anchoring.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataGraph, Direction};
use crate::query::{LocalId, QueryGraph, QuerySession};
use crate::vocab::{EdgeTypeId, NodeTypeId};

/// The far end of a candidate edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// A node already in the query graph.
    Existing(LocalId),
    /// A fresh node labeled with a schema-implied type.
    New(NodeTypeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CandidateEdge {
    pub anchor: LocalId,
    pub etype: EdgeTypeId,
    pub direction: Direction,
    pub other: Endpoint,
}

impl CandidateEdge {
    /// (source, target) once the other endpoint is resolved to `other_id`.
    pub fn oriented(&self, other_id: LocalId) -> (LocalId, LocalId) {
        match self.direction {
            Direction::Outgoing => (self.anchor, other_id),
            Direction::Incoming => (other_id, self.anchor),
        }
    }
}

/// Candidate edges for the active mode.
///
/// Edge types already recorded in `session` (with either sign) are left out.
/// A candidate between two existing nodes is emitted once, anchored at its
/// source; candidates to a fresh node are emitted per schema-implied type and
/// per witnessed direction.
pub fn active_candidates(
    g: &DataGraph,
    qg: &QueryGraph,
    session: &QuerySession,
) -> Result<Vec<CandidateEdge>> {
    if qg.is_empty() {
        return Err(Error::EmptyQueryGraph);
    }
    let schema = g.schema();
    let mut out = BTreeSet::new();
    for node in qg.nodes() {
        let ne = g.neighboring_candidate_edges(&node.label)?;
        let anchor_types = g.label_types(&node.label);
        for &etype in ne {
            if session.mentions(etype) {
                continue;
            }
            for direction in [Direction::Outgoing, Direction::Incoming] {
                let far: BTreeSet<NodeTypeId> = anchor_types
                    .iter()
                    .flat_map(|&t| -> Box<dyn Iterator<Item = NodeTypeId> + '_> {
                        match direction {
                            Direction::Outgoing => Box::new(schema.targets_from(t, etype)),
                            Direction::Incoming => Box::new(schema.sources_into(t, etype)),
                        }
                    })
                    .collect();
                if far.is_empty() {
                    continue;
                }
                if direction == Direction::Outgoing {
                    for other in qg.nodes() {
                        if other.id == node.id
                            || !g
                                .neighboring_candidate_edges(&other.label)?
                                .contains(&etype)
                        {
                            continue;
                        }
                        if g.label_types(&other.label).iter().any(|t| far.contains(t)) {
                            out.insert(CandidateEdge {
                                anchor: node.id,
                                etype,
                                direction,
                                other: Endpoint::Existing(other.id),
                            });
                        }
                    }
                }
                for t in far {
                    out.insert(CandidateEdge {
                        anchor: node.id,
                        etype,
                        direction,
                        other: Endpoint::New(t),
                    });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DataGraphBuilder, QueryNodeLabel};
    use crate::query::SignedEdge;

    fn film_graph() -> DataGraph {
        let mut b = DataGraphBuilder::new();
        b.add_node("tc", "Tom Cruise", "film", &["FilmActor"])
            .unwrap();
        b.add_node("tg", "Top Gun", "film", &["Film"]).unwrap();
        b.add_node("h", "Harvard", "edu", &["University"]).unwrap();
        b.add_node("lonely", "Nobody", "misc", &["Hermit"]).unwrap();
        b.add_edge("tc", "tg", "starring").unwrap();
        b.add_edge("tc", "h", "education").unwrap();
        b.build()
    }

    fn ty(g: &DataGraph, n: &str) -> QueryNodeLabel {
        QueryNodeLabel::Type(g.node_type(n).unwrap())
    }

    #[test]
    fn single_actor_node() {
        let g = film_graph();
        let mut qg = QueryGraph::new();
        let a = qg.add_node(&g, ty(&g, "FilmActor")).unwrap();
        let c = active_candidates(&g, &qg, &QuerySession::new()).unwrap();
        let starring = g.edge_type("starring").unwrap();
        let film = g.node_type("Film").unwrap();
        assert!(c.contains(&CandidateEdge {
            anchor: a,
            etype: starring,
            direction: Direction::Outgoing,
            other: Endpoint::New(film),
        }));
        assert_eq!(c.len(), 2); // starring and education
    }

    #[test]
    fn session_suppresses_types() {
        let g = film_graph();
        let mut qg = QueryGraph::new();
        qg.add_node(&g, ty(&g, "FilmActor")).unwrap();
        let starring = g.edge_type("starring").unwrap();
        let education = g.edge_type("education").unwrap();
        let s: QuerySession = [SignedEdge::neg(starring), SignedEdge::pos(education)]
            .into_iter()
            .collect();
        assert!(active_candidates(&g, &qg, &s).unwrap().is_empty());
    }

    #[test]
    fn empty_neighborhood_and_empty_graph() {
        let g = film_graph();
        let mut qg = QueryGraph::new();
        assert!(matches!(
            active_candidates(&g, &qg, &QuerySession::new()),
            Err(Error::EmptyQueryGraph)
        ));
        qg.add_node(&g, ty(&g, "Hermit")).unwrap();
        assert!(active_candidates(&g, &qg, &QuerySession::new())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn existing_and_new_variants_are_distinct() {
        let g = film_graph();
        let mut qg = QueryGraph::new();
        let a = qg.add_node(&g, ty(&g, "FilmActor")).unwrap();
        let f = qg.add_node(&g, ty(&g, "Film")).unwrap();
        let starring = g.edge_type("starring").unwrap();
        qg.add_edge(&g, a, f, starring).unwrap();
        let c = active_candidates(&g, &qg, &QuerySession::new()).unwrap();
        let film = g.node_type("Film").unwrap();
        let actor = g.node_type("FilmActor").unwrap();
        let want = [
            CandidateEdge {
                anchor: a,
                etype: starring,
                direction: Direction::Outgoing,
                other: Endpoint::Existing(f),
            },
            CandidateEdge {
                anchor: a,
                etype: starring,
                direction: Direction::Outgoing,
                other: Endpoint::New(film),
            },
            CandidateEdge {
                anchor: f,
                etype: starring,
                direction: Direction::Incoming,
                other: Endpoint::New(actor),
            },
        ];
        for w in want {
            assert!(c.contains(&w), "missing {w:?}");
        }
        // the existing-node variant is anchored at the source only
        assert!(!c
            .iter()
            .any(|x| x.anchor == f && x.other == Endpoint::Existing(a)));
    }
}
