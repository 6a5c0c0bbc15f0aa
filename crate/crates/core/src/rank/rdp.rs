//! Random decision paths.
//!
//! For a session `Q`, each path draws edges from `Q` uniformly without
//! replacement and narrows the log to the sessions containing every drawn
//! edge, stopping once at most `tau` sessions remain or `Q` runs out. A
//! candidate's score is its support (the fraction of surviving sessions that
//! contain it positively) averaged over `n_paths` paths.
//!
//! Paths that end on the same edge set share their support, so support is
//! evaluated once per distinct set and weighted by how many paths reached it.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeRanker, RankerKind};
use crate::error::{Error, Result};
use crate::query::{QuerySession, SignedEdge};
use crate::querylog::{intersect_sorted, QueryLog};
use crate::vocab::EdgeTypeId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RdpConfig {
    pub n_paths: usize,
    pub tau: usize,
    pub rng_seed: u64,
    /// `false` draws paths from positive session edges only.
    pub include_negatives: bool,
}

impl Default for RdpConfig {
    fn default() -> Self {
        RdpConfig {
            n_paths: 10,
            tau: 10,
            rng_seed: 0,
            include_negatives: true,
        }
    }
}

impl RdpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.tau == 0 {
            return Err(Error::InvalidConfig("n_paths and tau must be >= 1".into()));
        }
        Ok(())
    }
}

/// Edges in the order they were drawn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionPath(pub Vec<SignedEdge>);

fn path_pool(session: &QuerySession, include_negatives: bool) -> Vec<SignedEdge> {
    session
        .edges()
        .iter()
        .copied()
        .filter(|e| include_negatives || e.is_positive())
        .collect()
}

/// Draws `cfg.n_paths` decision paths. Each comes with its surviving session
/// ids, `None` standing for the whole log (empty path).
pub fn sample_paths(
    log: &QueryLog,
    session: &QuerySession,
    cfg: &RdpConfig,
    stream: u64,
) -> Vec<(DecisionPath, Option<Vec<u32>>)> {
    let pool = path_pool(session, cfg.include_negatives);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(stream);
    let mut out = Vec::with_capacity(cfg.n_paths);
    for _ in 0..cfg.n_paths {
        let mut order = pool.clone();
        let mut path = Vec::new();
        let mut surviving: Option<Vec<u32>> = None;
        for i in 0..order.len() {
            let j = rng.random_range(i..order.len());
            order.swap(i, j);
            let e = order[i];
            path.push(e);
            let narrowed = match surviving {
                None => log.postings(&e).to_vec(),
                Some(prev) => intersect_sorted(&prev, log.postings(&e)),
            };
            let done = narrowed.len() <= cfg.tau;
            surviving = Some(narrowed);
            if done {
                break;
            }
        }
        out.push((DecisionPath(path), surviving));
    }
    out
}

fn count_common(small: &[u32], big: &[u32]) -> usize {
    if small.len() * 8 < big.len() {
        small
            .iter()
            .filter(|x| big.binary_search(x).is_ok())
            .count()
    } else {
        intersect_sorted(small, big).len()
    }
}

pub struct RdpRanker {
    log: Arc<QueryLog>,
    cfg: RdpConfig,
}

impl RdpRanker {
    pub fn new(log: Arc<QueryLog>, cfg: RdpConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(RdpRanker { log, cfg })
    }

    pub fn config(&self) -> &RdpConfig {
        &self.cfg
    }
}

impl EdgeRanker for RdpRanker {
    fn kind(&self) -> RankerKind {
        if self.cfg.include_negatives {
            RankerKind::Rdp
        } else {
            RankerKind::RdpNoneg
        }
    }

    fn score(
        &self,
        etypes: &[EdgeTypeId],
        session: &QuerySession,
        stream: u64,
    ) -> Result<Vec<f64>> {
        if self.log.is_empty() {
            return Err(Error::EmptyLog);
        }
        if etypes.is_empty() {
            return Err(Error::NoCandidates);
        }
        let mut groups: BTreeMap<Vec<SignedEdge>, (usize, Option<Vec<u32>>)> = BTreeMap::new();
        for (DecisionPath(mut path), surviving) in
            sample_paths(&self.log, session, &self.cfg, stream)
        {
            path.sort_unstable();
            groups.entry(path).or_insert((0, surviving)).0 += 1;
        }
        let n = self.cfg.n_paths as f64;
        let mut scores = vec![0.0; etypes.len()];
        for (hits, surviving) in groups.values() {
            let weight = *hits as f64 / n;
            let den = surviving.as_ref().map_or(self.log.len(), Vec::len);
            if den == 0 {
                continue;
            }
            for (score, &e) in scores.iter_mut().zip(etypes) {
                let with_e = self.log.postings(&SignedEdge::pos(e));
                let num = match surviving {
                    None => with_e.len(),
                    Some(ids) => count_common(ids, with_e),
                };
                *score += weight * (num as f64 / den as f64);
            }
        }
        Ok(scores)
    }
}

/// Exact expected RDP scores under uniform path sampling.
///
/// Enumerates every ordering of the session edges, applies the same stopping
/// rule, and scans the log directly instead of using the inverted index.
/// Limited to sessions of at most 6 edges.
pub fn rdp_expected_score(
    etypes: &[EdgeTypeId],
    session: &QuerySession,
    log: &QueryLog,
    tau: usize,
    include_negatives: bool,
) -> Result<Vec<f64>> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let pool = path_pool(session, include_negatives);
    if pool.len() > 6 {
        return Err(Error::SessionTooLarge(pool.len()));
    }

    fn walk(
        log: &QueryLog,
        tau: usize,
        remaining: &mut Vec<SignedEdge>,
        path: &mut Vec<SignedEdge>,
        surviving: Option<Vec<usize>>,
        ends: &mut BTreeMap<Vec<SignedEdge>, (usize, Option<Vec<usize>>)>,
        multiplicity: usize,
    ) {
        let stop = surviving.as_ref().is_some_and(|s| s.len() <= tau) || remaining.is_empty();
        if stop {
            let mut key = path.clone();
            key.sort_unstable();
            // all orderings of the undrawn edges end here
            ends.entry(key).or_insert((0, surviving)).0 += multiplicity;
            return;
        }
        let below: usize = (1..remaining.len()).product();
        for i in 0..remaining.len() {
            let e = remaining.remove(i);
            let next: Vec<usize> = match &surviving {
                None => (0..log.len())
                    .filter(|&w| log.session(w).contains(&e))
                    .collect(),
                Some(s) => s
                    .iter()
                    .copied()
                    .filter(|&w| log.session(w).contains(&e))
                    .collect(),
            };
            path.push(e);
            walk(log, tau, remaining, path, Some(next), ends, below);
            path.pop();
            remaining.insert(i, e);
        }
    }

    let mut ends = BTreeMap::new();
    let mut remaining = pool.clone();
    walk(
        log,
        tau,
        &mut remaining,
        &mut Vec::new(),
        None,
        &mut ends,
        1,
    );
    let total: usize = (1..=pool.len()).product();

    let mut scores = vec![0.0; etypes.len()];
    for (orderings, surviving) in ends.values() {
        let members: Vec<usize> = match surviving {
            None => (0..log.len()).collect(),
            Some(s) => s.clone(),
        };
        if members.is_empty() {
            continue;
        }
        let weight = *orderings as f64 / total as f64;
        for (score, &e) in scores.iter_mut().zip(etypes) {
            let num = members
                .iter()
                .filter(|&&w| log.session(w).contains(&SignedEdge::pos(e)))
                .count();
            *score += weight * (num as f64 / members.len() as f64);
        }
    }
    Ok(scores)
}
