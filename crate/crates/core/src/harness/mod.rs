//! Offline completion experiment.
//!
//! Each target query graph is split into one instance per edge. An instance
//! starts from that single edge and repeatedly asks a ranker for its top
//! active-mode suggestion. A suggestion that matches a remaining target edge
//! is added to the partial graph and recorded positively; anything else is
//! recorded negatively. The run stops when the target is complete, when the
//! suggestion cap is reached, or when no candidate is left.
//!
//! The initial edge is given and is not counted as a suggestion.

mod report;
pub mod synth;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::candidates::{active_candidates, CandidateEdge, Endpoint};
use crate::error::{Error, Result};
use crate::graph::{DataGraph, Direction};
use crate::query::{matched_edges, LocalId, QueryEdge, QueryGraph, QuerySession, SignedEdge};
use crate::querylog::QueryLog;
use crate::rank::{build_ranker, rank_candidates, EdgeRanker, RankerConfig, RankerKind};

pub use report::{
    paired_rows, parse_results, render_paired, render_summary, results_tsv, summarize, PairedRow,
    RankerSummary, RESULTS_HEADER,
};

pub const DEFAULT_CAP: usize = 200;

/// One starting point of the completion experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    /// Position in the expanded instance list; also selects the random streams.
    pub id: usize,
    pub target_name: String,
    /// Index of the initial edge within the target's edge list.
    pub initial_edge: usize,
    pub target: QueryGraph,
    /// The initial edge with its endpoints, node ids shared with `target`.
    pub partial: QueryGraph,
}

/// Splits a target into one instance per edge. Ids start at `first_id`.
pub fn expand_target_to_instances(
    g: &DataGraph,
    name: &str,
    target: &QueryGraph,
    first_id: usize,
) -> Result<Vec<Instance>> {
    if target.edges().is_empty() {
        return Err(Error::EdgelessTarget);
    }
    target
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut nodes = vec![node_of(target, e.src)];
            if e.dst != e.src {
                nodes.push(node_of(target, e.dst));
            }
            Ok(Instance {
                id: first_id + i,
                target_name: name.to_owned(),
                initial_edge: i,
                target: target.clone(),
                partial: QueryGraph::from_parts(g, nodes, vec![*e])?,
            })
        })
        .collect()
}

fn node_of(qg: &QueryGraph, id: LocalId) -> crate::query::QueryNode {
    *qg.nodes()
        .iter()
        .find(|n| n.id == id)
        .expect("edge endpoint exists")
}

/// Expands every target in order, numbering instances consecutively.
pub fn expand_all(g: &DataGraph, targets: &[(String, QueryGraph)]) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (name, t) in targets {
        let next = out.len();
        out.extend(expand_target_to_instances(g, name, t, next)?);
    }
    Ok(out)
}

/// Reads every `*.qg` file in `dir`, sorted by file name.
pub fn load_targets(g: &DataGraph, dir: impl AsRef<Path>) -> Result<Vec<(String, QueryGraph)>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qg"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok((name, QueryGraph::load(g, &p)?))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    Cap,
    NoCandidates,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Completed => "completed",
            StopReason::Cap => "cap",
            StopReason::NoCandidates => "no-candidates",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionResult {
    pub instance: usize,
    pub target: String,
    pub initial_edge: usize,
    pub ranker: RankerKind,
    pub seed: u64,
    /// Ranker-issued suggestions; the initial edge is not counted.
    pub suggestions_used: usize,
    pub stop: StopReason,
    /// Seconds spent inside rank calls.
    pub wall_time: f64,
    /// Matched target edges over target edges.
    pub similarity: (usize, usize),
    /// The query session at the end, starting with the initial edge.
    pub transcript: Vec<SignedEdge>,
}

impl CompletionResult {
    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }

    pub fn similarity_value(&self) -> f64 {
        self.similarity.0 as f64 / self.similarity.1 as f64
    }

    /// Equality on everything except the measured wall time.
    pub fn same_outcome(&self, other: &CompletionResult) -> bool {
        CompletionResult {
            wall_time: 0.0,
            ..self.clone()
        } == CompletionResult {
            wall_time: 0.0,
            ..other.clone()
        }
    }
}

/// Random stream for the `ordinal`-th rank call of an instance.
pub fn rank_stream(instance: usize, ordinal: usize) -> u64 {
    ((instance as u64) << 32) | ordinal as u64
}

struct Run<'a> {
    g: &'a DataGraph,
    inst: &'a Instance,
    qg: QueryGraph,
    session: QuerySession,
    /// partial id -> target id
    map: BTreeMap<LocalId, LocalId>,
    remaining: Vec<QueryEdge>,
}

impl<'a> Run<'a> {
    fn new(g: &'a DataGraph, inst: &'a Instance) -> Self {
        let first = inst.target.edges()[inst.initial_edge];
        let mut remaining = inst.target.edges().to_vec();
        remaining.remove(inst.initial_edge);
        let map = inst.partial.nodes().iter().map(|n| (n.id, n.id)).collect();
        let mut session = QuerySession::new();
        session.push(SignedEdge::pos(first.etype));
        Run {
            g,
            inst,
            qg: inst.partial.clone(),
            session,
            map,
            remaining,
        }
    }

    fn mapped_target(&self, id: LocalId) -> Option<LocalId> {
        self.map.get(&id).copied()
    }

    fn is_mapped(&self, t: LocalId) -> bool {
        self.map.values().any(|&v| v == t)
    }

    /// Index of a remaining target edge realized by `c`, if any.
    fn matching_edge(&self, c: &CandidateEdge) -> Option<usize> {
        let anchor = self.mapped_target(c.anchor)?;
        self.remaining.iter().position(|r| {
            if r.etype != c.etype {
                return false;
            }
            let far = match c.direction {
                Direction::Outgoing if r.src == anchor => r.dst,
                Direction::Incoming if r.dst == anchor => r.src,
                _ => return false,
            };
            match c.other {
                Endpoint::Existing(u) => self.mapped_target(u) == Some(far),
                Endpoint::New(t) => {
                    !self.is_mapped(far)
                        && self
                            .inst
                            .target
                            .label(far)
                            .is_ok_and(|l| self.g.label_types(&l).contains(&t))
                }
            }
        })
    }

    /// Accepts `c` as realizing remaining edge `idx`.
    fn accept(&mut self, c: &CandidateEdge, idx: usize) -> Result<()> {
        let r = self.remaining.remove(idx);
        let far = if c.direction == Direction::Outgoing {
            r.dst
        } else {
            r.src
        };
        let other = match c.other {
            Endpoint::Existing(u) => u,
            Endpoint::New(_) => {
                let id = self.qg.add_node(self.g, self.inst.target.label(far)?)?;
                self.map.insert(id, far);
                id
            }
        };
        let (src, dst) = c.oriented(other);
        self.qg.add_edge(self.g, src, dst, c.etype)?;
        self.session.push(SignedEdge::pos(c.etype));
        Ok(())
    }

    /// Ranks the current candidates. `Ok(None)` means none are left.
    fn suggest(
        &self,
        ranker: &dyn EdgeRanker,
        stream: u64,
        wall: &mut f64,
    ) -> Result<Option<Vec<crate::rank::RankedSuggestion>>> {
        let cands = active_candidates(self.g, &self.qg, &self.session)?;
        if cands.is_empty() {
            return Ok(None);
        }
        let t0 = Instant::now();
        let ranked = rank_candidates(ranker, &cands, &self.session, stream, self.g.edge_types())?;
        *wall += t0.elapsed().as_secs_f64();
        Ok(Some(ranked))
    }

    /// Applies the top suggestion's edge type. Returns the signed edge recorded.
    fn respond(&mut self, ranked: &[crate::rank::RankedSuggestion]) -> Result<SignedEdge> {
        let etype = ranked[0].candidate.etype;
        let hit = ranked
            .iter()
            .take_while(|s| s.candidate.etype == etype)
            .find_map(|s| self.matching_edge(&s.candidate).map(|i| (s.candidate, i)));
        match hit {
            Some((c, i)) => {
                self.accept(&c, i)?;
                Ok(SignedEdge::pos(etype))
            }
            None => {
                let e = SignedEdge::neg(etype);
                self.session.push(e);
                Ok(e)
            }
        }
    }

    fn finish(
        self,
        ranker: RankerKind,
        seed: u64,
        used: usize,
        stop: StopReason,
        wall_time: f64,
    ) -> CompletionResult {
        CompletionResult {
            instance: self.inst.id,
            target: self.inst.target_name.clone(),
            initial_edge: self.inst.initial_edge,
            ranker,
            seed,
            suggestions_used: used,
            stop,
            wall_time,
            similarity: (
                matched_edges(&self.qg, &self.inst.target),
                self.inst.target.edges().len(),
            ),
            transcript: self.session.edges().to_vec(),
        }
    }
}

/// Runs one instance to completion, the cap, or exhaustion.
///
/// `seed` is recorded in the result; the ranker itself carries its seed and
/// each rank call uses stream [`rank_stream`]`(instance.id, call ordinal)`.
pub fn run_completion(
    g: &DataGraph,
    inst: &Instance,
    ranker: &dyn EdgeRanker,
    cap: usize,
    seed: u64,
) -> Result<CompletionResult> {
    if cap == 0 {
        return Err(Error::InvalidConfig("suggestion cap must be >= 1".into()));
    }
    let mut run = Run::new(g, inst);
    let mut wall = 0.0;
    let mut used = 0;
    let stop = loop {
        if run.remaining.is_empty() {
            break StopReason::Completed;
        }
        if used == cap {
            break StopReason::Cap;
        }
        let Some(ranked) = run.suggest(ranker, rank_stream(inst.id, used), &mut wall)? else {
            break StopReason::NoCandidates;
        };
        run.respond(&ranked)?;
        used += 1;
    };
    Ok(run.finish(ranker.kind(), seed, used, stop, wall))
}

/// Re-drives an instance from a recorded result's transcript.
///
/// At every step the ranker must reproduce the recorded suggestion; the
/// rebuilt result is returned so callers can compare it with the record.
pub fn replay(
    g: &DataGraph,
    inst: &Instance,
    ranker: &dyn EdgeRanker,
    recorded: &CompletionResult,
) -> Result<CompletionResult> {
    let mut run = Run::new(g, inst);
    let mut wall = 0.0;
    let steps = recorded.transcript.get(1..).unwrap_or_default();
    for (i, want) in steps.iter().enumerate() {
        let ranked = run
            .suggest(ranker, rank_stream(inst.id, i), &mut wall)?
            .ok_or(Error::NoCandidates)?;
        let got = run.respond(&ranked)?;
        if got != *want {
            return Err(Error::ReplayDivergence {
                step: i,
                recorded: want.token(g.edge_types()),
                actual: got.token(g.edge_types()),
            });
        }
    }
    Ok(run.finish(
        ranker.kind(),
        recorded.seed,
        steps.len(),
        recorded.stop,
        wall,
    ))
}

/// A data graph, a log whose vocabulary extends the graph's, and instances.
pub struct Experiment<'a> {
    pub graph: &'a DataGraph,
    pub log: Arc<QueryLog>,
    pub instances: &'a [Instance],
    pub cap: usize,
}

impl<'a> Experiment<'a> {
    pub fn new(
        graph: &'a DataGraph,
        log: Arc<QueryLog>,
        instances: &'a [Instance],
        cap: usize,
    ) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidConfig("suggestion cap must be >= 1".into()));
        }
        let gv = graph.edge_types();
        let lv = log.vocab();
        if lv.len() < gv.len() || gv.iter().any(|(i, n)| lv.name(i) != n) {
            return Err(Error::InvalidConfig(
                "log vocabulary does not extend the graph's edge types".into(),
            ));
        }
        Ok(Experiment {
            graph,
            log,
            instances,
            cap,
        })
    }

    /// Runs every instance with one ranker, in parallel; results in instance order.
    pub fn run(&self, cfg: &RankerConfig) -> Result<Vec<CompletionResult>> {
        let ranker = build_ranker(cfg, self.log.clone())?;
        let next = AtomicUsize::new(0);
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let mut slots: Vec<Option<Result<CompletionResult>>> =
            (0..self.instances.len()).map(|_| None).collect();
        let chunks: Vec<Vec<(usize, Result<CompletionResult>)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers.min(self.instances.len()).max(1))
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(inst) = self.instances.get(i) else {
                                break;
                            };
                            done.push((
                                i,
                                run_completion(
                                    self.graph,
                                    inst,
                                    ranker.as_ref(),
                                    self.cap,
                                    cfg.seed,
                                ),
                            ));
                        }
                        done
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        for (i, r) in chunks.into_iter().flatten() {
            slots[i] = Some(r);
        }
        slots
            .into_iter()
            .map(|r| r.expect("every instance ran"))
            .collect()
    }

    /// Runs once per seed, concatenating the results.
    pub fn run_seeds(&self, cfg: &RankerConfig, seeds: &[u64]) -> Result<Vec<CompletionResult>> {
        let mut out = Vec::new();
        for &seed in seeds {
            out.extend(self.run(&RankerConfig {
                seed,
                ..cfg.clone()
            })?);
        }
        Ok(out)
    }

    /// Mean suggestions for every `(n_paths, tau)` pair, averaged over seeds.
    pub fn sweep(
        &self,
        base: &RankerConfig,
        n_paths: &[usize],
        taus: &[usize],
        seeds: &[u64],
    ) -> Result<Vec<SweepCell>> {
        let mut out = Vec::new();
        for &tau in taus {
            for &n in n_paths {
                let cfg = RankerConfig {
                    n_paths: n,
                    tau,
                    ..base.clone()
                };
                let results = self.run_seeds(&cfg, seeds)?;
                let s = &summarize(&results)?[0];
                out.push(SweepCell {
                    n_paths: n,
                    tau,
                    mean_suggestions: s.mean_suggestions,
                    completion: s.completion_fraction,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub n_paths: usize,
    pub tau: usize,
    pub mean_suggestions: f64,
    pub completion: f64,
}
