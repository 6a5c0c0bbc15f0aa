//! Candidate-edge rankers.
//!
//! Every ranker scores edge types against the ongoing session; turning those
//! scores into an ordered suggestion list (and breaking ties) is shared.

mod baseline;
mod car;
mod nb;
mod rdp;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::candidates::CandidateEdge;
use crate::error::{Error, Result};
use crate::query::QuerySession;
use crate::querylog::QueryLog;
use crate::vocab::{EdgeTypeId, Vocabulary};

pub use baseline::{AlphabeticalRanker, FrequencyRanker};
pub use car::{car_train, CarRanker, CarRule, CarRuleSet};
pub use nb::{nb_train, training_instances, NbModel, NbRanker};
pub use rdp::{rdp_expected_score, sample_paths, DecisionPath, RdpConfig, RdpRanker};

/// Scores edge types for a session.
pub trait EdgeRanker: Send + Sync {
    fn kind(&self) -> RankerKind;

    /// One non-negative score per entry of `etypes`.
    ///
    /// `stream` selects the random stream for stochastic rankers; the same
    /// `(inputs, stream)` always yields the same scores.
    fn score(&self, etypes: &[EdgeTypeId], session: &QuerySession, stream: u64)
        -> Result<Vec<f64>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RankerKind {
    #[serde(rename = "rdp")]
    Rdp,
    #[serde(rename = "rdp-noneg")]
    RdpNoneg,
    #[serde(rename = "nb")]
    Nb,
    #[serde(rename = "car")]
    Car,
    #[serde(rename = "freq")]
    Freq,
    #[serde(rename = "alpha")]
    Alpha,
}

impl RankerKind {
    pub const ALL: [RankerKind; 6] = [
        RankerKind::Rdp,
        RankerKind::RdpNoneg,
        RankerKind::Nb,
        RankerKind::Car,
        RankerKind::Freq,
        RankerKind::Alpha,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RankerKind::Rdp => "rdp",
            RankerKind::RdpNoneg => "rdp-noneg",
            RankerKind::Nb => "nb",
            RankerKind::Car => "car",
            RankerKind::Freq => "freq",
            RankerKind::Alpha => "alpha",
        }
    }
}

impl fmt::Display for RankerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RankerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown ranker `{s}`")))
    }
}

/// Everything needed to build any ranker over a log.
#[derive(Clone, Debug, PartialEq)]
pub struct RankerConfig {
    pub kind: RankerKind,
    pub n_paths: usize,
    pub tau: usize,
    pub seed: u64,
    pub car_min_support: usize,
    pub car_min_confidence: f64,
}

impl RankerConfig {
    pub fn new(kind: RankerKind) -> Self {
        RankerConfig {
            kind,
            n_paths: 10,
            tau: 10,
            seed: 0,
            car_min_support: 1,
            car_min_confidence: 0.0,
        }
    }

    pub fn rdp(&self) -> RdpConfig {
        RdpConfig {
            n_paths: self.n_paths,
            tau: self.tau,
            rng_seed: self.seed,
            include_negatives: self.kind != RankerKind::RdpNoneg,
        }
    }
}

pub fn build_ranker(cfg: &RankerConfig, log: Arc<QueryLog>) -> Result<Arc<dyn EdgeRanker>> {
    Ok(match cfg.kind {
        RankerKind::Rdp | RankerKind::RdpNoneg => Arc::new(RdpRanker::new(log, cfg.rdp())?),
        RankerKind::Nb => Arc::new(NbRanker::new(nb_train(&log)?)),
        RankerKind::Car => Arc::new(CarRanker::new(car_train(
            &log,
            cfg.car_min_support,
            cfg.car_min_confidence,
        ))),
        RankerKind::Freq => Arc::new(FrequencyRanker::new(log)),
        RankerKind::Alpha => Arc::new(AlphabeticalRanker),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedSuggestion {
    pub candidate: CandidateEdge,
    pub score: f64,
}

fn order(vocab: &Vocabulary, a: (EdgeTypeId, f64), b: (EdgeTypeId, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then_with(|| vocab.name(a.0 .0).cmp(vocab.name(b.0 .0)))
}

/// Ranks edge types: score descending, then name ascending.
pub fn rank_edge_types(
    ranker: &dyn EdgeRanker,
    etypes: &[EdgeTypeId],
    session: &QuerySession,
    stream: u64,
    vocab: &Vocabulary,
) -> Result<Vec<(EdgeTypeId, f64)>> {
    if etypes.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut uniq = etypes.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let scores = ranker.score(&uniq, session, stream)?;
    let mut out: Vec<(EdgeTypeId, f64)> = uniq.into_iter().zip(scores).collect();
    out.sort_by(|&a, &b| order(vocab, a, b));
    Ok(out)
}

/// Ranks candidate edges by the score of their edge type.
///
/// Ties beyond the edge-type order fall back to the candidate order
/// (anchor, then direction, then far endpoint).
pub fn rank_candidates(
    ranker: &dyn EdgeRanker,
    candidates: &[CandidateEdge],
    session: &QuerySession,
    stream: u64,
    vocab: &Vocabulary,
) -> Result<Vec<RankedSuggestion>> {
    let etypes: Vec<EdgeTypeId> = candidates.iter().map(|c| c.etype).collect();
    let ranked = rank_edge_types(ranker, &etypes, session, stream, vocab)?;
    let mut out: Vec<RankedSuggestion> = Vec::with_capacity(candidates.len());
    let mut sorted = candidates.to_vec();
    sorted.sort();
    for (etype, score) in ranked {
        out.extend(
            sorted
                .iter()
                .filter(|c| c.etype == etype)
                .map(|&candidate| RankedSuggestion { candidate, score }),
        );
    }
    Ok(out)
}
