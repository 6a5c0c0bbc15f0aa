use std::sync::Arc;

use super::{EdgeRanker, RankerKind};
use crate::error::{Error, Result};
use crate::query::{QuerySession, SignedEdge};
use crate::querylog::QueryLog;
use crate::vocab::EdgeTypeId;

/// Scores each edge type by the number of sessions holding it positively.
pub struct FrequencyRanker {
    log: Arc<QueryLog>,
}

impl FrequencyRanker {
    pub fn new(log: Arc<QueryLog>) -> Self {
        FrequencyRanker { log }
    }
}

impl EdgeRanker for FrequencyRanker {
    fn kind(&self) -> RankerKind {
        RankerKind::Freq
    }

    fn score(
        &self,
        etypes: &[EdgeTypeId],
        _session: &QuerySession,
        _stream: u64,
    ) -> Result<Vec<f64>> {
        if etypes.is_empty() {
            return Err(Error::NoCandidates);
        }
        Ok(etypes
            .iter()
            .map(|&e| self.log.postings(&SignedEdge::pos(e)).len() as f64)
            .collect())
    }
}

/// All scores zero; the shared name tie-break yields alphabetical order.
pub struct AlphabeticalRanker;

impl EdgeRanker for AlphabeticalRanker {
    fn kind(&self) -> RankerKind {
        RankerKind::Alpha
    }

    fn score(
        &self,
        etypes: &[EdgeTypeId],
        _session: &QuerySession,
        _stream: u64,
    ) -> Result<Vec<f64>> {
        if etypes.is_empty() {
            return Err(Error::NoCandidates);
        }
        Ok(vec![0.0; etypes.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::rank_edge_types;
    use crate::rank::testutil::*;

    #[test]
    fn frequency_orders_by_count_then_name() {
        let log = table1();
        let r = FrequencyRanker::new(log.clone());
        let q = QuerySession::new();
        let ranked = rank_edge_types(
            &r,
            &[et(&log, "education"), et(&log, "director")],
            &q,
            0,
            log.vocab(),
        )
        .unwrap();
        assert_eq!(ranked[0], (et(&log, "director"), 3.0));
        // writer and education both appear positively twice
        let ranked = rank_edge_types(
            &r,
            &[et(&log, "writer"), et(&log, "education")],
            &q,
            0,
            log.vocab(),
        )
        .unwrap();
        assert_eq!(ranked[0].0, et(&log, "education"));
        assert_eq!(ranked[0].1, ranked[1].1);
    }

    #[test]
    fn alphabetical() {
        let log = table1();
        let ranked = rank_edge_types(
            &AlphabeticalRanker,
            &[et(&log, "writer"), et(&log, "editor")],
            &QuerySession::new(),
            0,
            log.vocab(),
        )
        .unwrap();
        assert_eq!(ranked[0].0, et(&log, "editor"));
    }
}
