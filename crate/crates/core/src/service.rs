//! Stateful suggestion sessions for an interactive query builder.
//!
//! Every operation is expressed as an [`ApiCall`] and answered with an
//! [`ApiResponse`], so a recorded call list can be replayed against a fresh
//! service. Session ids, rank streams and timestamps are all derived from the
//! configured seed and logical counters: replaying the same calls yields the
//! same responses and the same persisted log lines.
//!
//! A suggestion batch that is superseded without an answer (a refresh, or any
//! other edit of the graph) counts as ignored: its edge types are recorded as
//! negatives, exactly as if the user had answered with no selection.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::candidates::{active_candidates, CandidateEdge, Endpoint};
use crate::error::{Error, Result};
use crate::graph::{DataGraph, Direction, QueryNodeLabel};
use crate::query::{LocalId, QueryGraph, QuerySession, SignedEdge};
use crate::querylog::QueryLog;
use crate::rank::{build_ranker, rank_candidates, rank_edge_types, EdgeRanker, RankerConfig};

pub const DEFAULT_K: usize = 3;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Size of an active-mode batch.
    pub k: usize,
    pub ranker: RankerConfig,
    /// Finished sessions are appended here, one line each.
    pub log_path: PathBuf,
    /// Final query graphs are written here as `<session id>.qg`.
    pub archive_dir: Option<PathBuf>,
    /// Seeds session ids.
    pub seed: u64,
}

impl ServiceConfig {
    pub fn new(log_path: impl Into<PathBuf>, ranker: RankerConfig) -> Self {
        ServiceConfig {
            k: DEFAULT_K,
            ranker,
            log_path: log_path.into(),
            archive_dir: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SessionState {
    Open,
    PendingConnection,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogLevel {
    Domains,
    Types,
    Names,
}

/// Every operation of the service.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ApiCall {
    CreateSession,
    GetSession {
        session: String,
    },
    /// `kind` is `type` or `name`.
    AddNode {
        session: String,
        kind: String,
        label: String,
    },
    ActiveSuggest {
        session: String,
    },
    RespondActive {
        session: String,
        version: u64,
        accepted: Vec<usize>,
    },
    PassiveEdgeSuggest {
        session: String,
        src: LocalId,
        dst: LocalId,
    },
    AddEdge {
        session: String,
        src: LocalId,
        dst: LocalId,
        etype: String,
    },
    Catalog {
        level: CatalogLevel,
        parent: Option<String>,
        keyword: Option<String>,
    },
    Submit {
        session: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ApiResponse {
    Created { session: String },
    Session(SessionView),
    NodeAdded { node: LocalId, state: SessionState },
    Suggestions(SuggestionBatch),
    Responded(SessionView),
    EdgeLabels { labels: Vec<EdgeLabel> },
    EdgeAdded(SessionView),
    Catalog { entries: Vec<String> },
    Submitted { log_line: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: LocalId,
    /// `type` or `name`.
    pub kind: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub src: LocalId,
    pub dst: LocalId,
    pub etype: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub state: SessionState,
    pub nodes: Vec<NodeView>,
    pub edges: Vec<EdgeView>,
    /// Signed tokens in order; negatives carry a `~` prefix.
    pub query_session: Vec<String>,
    pub created: u64,
    pub updated: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndpointView {
    /// An existing query node.
    Existing { node: LocalId },
    /// A node that would be created with this type.
    New { node_type: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub index: usize,
    pub etype: String,
    pub anchor: LocalId,
    /// `outgoing` when the anchor is the source.
    pub direction: String,
    pub other: EndpointView,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuggestionBatch {
    pub version: u64,
    pub suggestions: Vec<SuggestionView>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub etype: String,
    pub score: f64,
    /// Whether `src -> dst` is schema-valid.
    pub forward: bool,
    /// Whether `dst -> src` is schema-valid.
    pub backward: bool,
}

struct Outstanding {
    version: u64,
    candidates: Vec<CandidateEdge>,
}

struct LiveSession {
    id: String,
    ordinal: u64,
    qg: QueryGraph,
    session: QuerySession,
    closed: bool,
    outstanding: Option<Outstanding>,
    next_version: u64,
    rank_calls: u64,
    created: u64,
    updated: u64,
}

impl LiveSession {
    fn state(&self) -> SessionState {
        if self.closed {
            SessionState::Closed
        } else if self.qg.is_pending_connection() {
            SessionState::PendingConnection
        } else {
            SessionState::Open
        }
    }

    fn ensure_open(&self) -> Result<()> {
        if self.closed {
            Err(Error::SessionClosed(self.id.clone()))
        } else {
            Ok(())
        }
    }

    /// Records an unanswered batch as ignored.
    fn supersede(&mut self) {
        if let Some(o) = self.outstanding.take() {
            for c in o.candidates {
                self.session.push(SignedEdge::neg(c.etype));
            }
        }
    }

    fn stream(&mut self) -> u64 {
        let s = (self.ordinal << 32) | self.rank_calls;
        self.rank_calls += 1;
        s
    }
}

struct Registry {
    sessions: BTreeMap<String, Arc<Mutex<LiveSession>>>,
    created: u64,
}

pub struct SuggestionService {
    graph: Arc<DataGraph>,
    log: Arc<QueryLog>,
    ranker: Arc<dyn EdgeRanker>,
    cfg: ServiceConfig,
    registry: Mutex<Registry>,
    clock: Mutex<u64>,
    writer: Mutex<()>,
    transcript: Mutex<Vec<ApiCall>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SuggestionService {
    /// Builds the ranker over `log`; its vocabulary must extend the graph's.
    pub fn new(graph: Arc<DataGraph>, log: Arc<QueryLog>, cfg: ServiceConfig) -> Result<Self> {
        if cfg.k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        let gv = graph.edge_types();
        if log.vocab().len() < gv.len() || gv.iter().any(|(i, n)| log.vocab().name(i) != n) {
            return Err(Error::InvalidConfig(
                "log vocabulary does not extend the graph's edge types".into(),
            ));
        }
        let ranker = build_ranker(&cfg.ranker, log.clone())?;
        Ok(SuggestionService {
            graph,
            log,
            ranker,
            cfg,
            registry: Mutex::new(Registry {
                sessions: BTreeMap::new(),
                created: 0,
            }),
            clock: Mutex::new(0),
            writer: Mutex::new(()),
            transcript: Mutex::new(Vec::new()),
        })
    }

    pub fn graph(&self) -> &DataGraph {
        &self.graph
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    /// Every call applied so far, in order.
    pub fn transcript(&self) -> Vec<ApiCall> {
        lock(&self.transcript).clone()
    }

    fn tick(&self) -> u64 {
        let mut c = lock(&self.clock);
        *c += 1;
        *c
    }

    fn live(&self, id: &str) -> Result<Arc<Mutex<LiveSession>>> {
        lock(&self.registry)
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }

    /// Applies one call and records it in the transcript, successful or not.
    pub fn apply(&self, call: &ApiCall) -> Result<ApiResponse> {
        lock(&self.transcript).push(call.clone());
        let now = self.tick();
        match call {
            ApiCall::CreateSession => Ok(ApiResponse::Created {
                session: self.create_session(now),
            }),
            ApiCall::GetSession { session } => Ok(ApiResponse::Session(
                self.view(&lock(&*self.live(session)?)),
            )),
            ApiCall::AddNode {
                session,
                kind,
                label,
            } => self.add_node(session, kind, label, now),
            ApiCall::ActiveSuggest { session } => self.active_suggest(session, now),
            ApiCall::RespondActive {
                session,
                version,
                accepted,
            } => self.respond_active(session, *version, accepted, now),
            ApiCall::PassiveEdgeSuggest { session, src, dst } => {
                self.passive_edge_suggest(session, *src, *dst, now)
            }
            ApiCall::AddEdge {
                session,
                src,
                dst,
                etype,
            } => self.add_edge(session, *src, *dst, etype, now),
            ApiCall::Catalog {
                level,
                parent,
                keyword,
            } => Ok(ApiResponse::Catalog {
                entries: self.catalog(*level, parent.as_deref(), keyword.as_deref())?,
            }),
            ApiCall::Submit { session } => self.submit(session, now),
        }
    }

    fn create_session(&self, now: u64) -> String {
        let mut reg = lock(&self.registry);
        let ordinal = reg.created;
        reg.created += 1;
        let id = format!("s{:016x}", splitmix64(self.cfg.seed ^ splitmix64(ordinal)));
        reg.sessions.insert(
            id.clone(),
            Arc::new(Mutex::new(LiveSession {
                id: id.clone(),
                ordinal,
                qg: QueryGraph::new(),
                session: QuerySession::new(),
                closed: false,
                outstanding: None,
                next_version: 1,
                rank_calls: 0,
                created: now,
                updated: now,
            })),
        );
        id
    }

    fn view(&self, s: &LiveSession) -> SessionView {
        let g = &*self.graph;
        SessionView {
            id: s.id.clone(),
            state: s.state(),
            nodes: s
                .qg
                .nodes()
                .iter()
                .map(|n| {
                    let (kind, label) = match n.label {
                        QueryNodeLabel::Entity(v) => ("name", g.node(v).id.clone()),
                        QueryNodeLabel::Type(t) => ("type", g.node_type_name(t).to_owned()),
                    };
                    NodeView {
                        id: n.id,
                        kind: kind.to_owned(),
                        label,
                    }
                })
                .collect(),
            edges: s
                .qg
                .edges()
                .iter()
                .map(|e| EdgeView {
                    src: e.src,
                    dst: e.dst,
                    etype: g.edge_type_name(e.etype).to_owned(),
                })
                .collect(),
            query_session: s
                .session
                .edges()
                .iter()
                .map(|e| e.token(g.edge_types()))
                .collect(),
            created: s.created,
            updated: s.updated,
        }
    }

    fn add_node(&self, id: &str, kind: &str, label: &str, now: u64) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        let label = self.graph.resolve_label(kind, label)?;
        if s.qg.is_pending_connection() {
            return Err(Error::PendingConnection);
        }
        s.supersede();
        let node = s.qg.add_node(&self.graph, label)?;
        s.updated = now;
        Ok(ApiResponse::NodeAdded {
            node,
            state: s.state(),
        })
    }

    fn active_suggest(&self, id: &str, now: u64) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        if s.qg.is_empty() {
            return Err(Error::EmptyQueryGraph);
        }
        if s.qg.is_pending_connection() {
            return Err(Error::PendingConnection);
        }
        s.supersede();
        let cands = active_candidates(&self.graph, &s.qg, &s.session)?;
        let mut batch = Vec::new();
        if !cands.is_empty() {
            let stream = s.stream();
            let ranked = rank_candidates(
                self.ranker.as_ref(),
                &cands,
                &s.session,
                stream,
                self.graph.edge_types(),
            )?;
            // best anchoring per edge type, k distinct edge types
            for r in ranked {
                if batch.len() == self.cfg.k {
                    break;
                }
                if batch
                    .iter()
                    .all(|(c, _): &(CandidateEdge, f64)| c.etype != r.candidate.etype)
                {
                    batch.push((r.candidate, r.score));
                }
            }
        }
        let version = s.next_version;
        s.next_version += 1;
        s.outstanding = Some(Outstanding {
            version,
            candidates: batch.iter().map(|(c, _)| *c).collect(),
        });
        s.updated = now;
        let g = &*self.graph;
        Ok(ApiResponse::Suggestions(SuggestionBatch {
            version,
            suggestions: batch
                .into_iter()
                .enumerate()
                .map(|(index, (c, score))| SuggestionView {
                    index,
                    etype: g.edge_type_name(c.etype).to_owned(),
                    anchor: c.anchor,
                    direction: match c.direction {
                        Direction::Outgoing => "outgoing",
                        Direction::Incoming => "incoming",
                    }
                    .to_owned(),
                    other: match c.other {
                        Endpoint::Existing(node) => EndpointView::Existing { node },
                        Endpoint::New(t) => EndpointView::New {
                            node_type: g.node_type_name(t).to_owned(),
                        },
                    },
                    score,
                })
                .collect(),
        }))
    }

    fn respond_active(
        &self,
        id: &str,
        version: u64,
        accepted: &[usize],
        now: u64,
    ) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        let Some(o) = s.outstanding.as_ref() else {
            return Err(Error::NoOutstandingSuggestions(id.to_owned()));
        };
        if o.version != version {
            return Err(Error::StaleBatch {
                expected: o.version,
                got: version,
            });
        }
        if let Some(&bad) = accepted.iter().find(|&&i| i >= o.candidates.len()) {
            return Err(Error::BadSuggestionIndex(bad));
        }
        let o = s.outstanding.take().expect("checked above");
        for (i, c) in o.candidates.iter().enumerate() {
            if !accepted.contains(&i) {
                s.session.push(SignedEdge::neg(c.etype));
                continue;
            }
            let other = match c.other {
                Endpoint::Existing(u) => u,
                Endpoint::New(t) => s.qg.add_node(&self.graph, QueryNodeLabel::Type(t))?,
            };
            let (src, dst) = c.oriented(other);
            s.qg.add_edge(&self.graph, src, dst, c.etype)?;
            s.session.push(SignedEdge::pos(c.etype));
        }
        s.updated = now;
        Ok(ApiResponse::Responded(self.view(&s)))
    }

    fn passive_edge_suggest(
        &self,
        id: &str,
        src: LocalId,
        dst: LocalId,
        now: u64,
    ) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        let a = s.qg.label(src)?;
        let b = s.qg.label(dst)?;
        let cands = self.graph.passive_candidates(&a, &b)?;
        if cands.is_empty() {
            return Err(Error::NoPossibleRelationship);
        }
        let etypes: Vec<_> = cands.iter().map(|c| c.etype).collect();
        let stream = s.stream();
        let ranked = rank_edge_types(
            self.ranker.as_ref(),
            &etypes,
            &s.session,
            stream,
            self.graph.edge_types(),
        )?;
        s.updated = now;
        Ok(ApiResponse::EdgeLabels {
            labels: ranked
                .into_iter()
                .map(|(e, score)| {
                    let c = cands
                        .iter()
                        .find(|c| c.etype == e)
                        .expect("ranked from cands");
                    EdgeLabel {
                        etype: self.graph.edge_type_name(e).to_owned(),
                        score,
                        forward: c.forward,
                        backward: c.backward,
                    }
                })
                .collect(),
        })
    }

    fn add_edge(
        &self,
        id: &str,
        src: LocalId,
        dst: LocalId,
        etype: &str,
        now: u64,
    ) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        let e = self
            .graph
            .edge_type(etype)
            .ok_or_else(|| Error::UnknownEdgeType(etype.to_owned()))?;
        s.qg.label(src)?;
        s.qg.label(dst)?;
        s.supersede();
        s.qg.add_edge(&self.graph, src, dst, e)?;
        s.session.push(SignedEdge::pos(e));
        s.updated = now;
        Ok(ApiResponse::EdgeAdded(self.view(&s)))
    }

    /// Alphabetical catalog entries, filtered by a case-insensitive substring.
    pub fn catalog(
        &self,
        level: CatalogLevel,
        parent: Option<&str>,
        keyword: Option<&str>,
    ) -> Result<Vec<String>> {
        let g = &*self.graph;
        let need_parent = || parent.ok_or_else(|| Error::UnknownCatalogParent(String::new()));
        let mut entries: Vec<String> = match level {
            CatalogLevel::Domains => g.domains().keys().cloned().collect(),
            CatalogLevel::Types => {
                let d = need_parent()?;
                g.domains()
                    .get(d)
                    .ok_or_else(|| Error::UnknownCatalogParent(d.to_owned()))?
                    .iter()
                    .map(|&t| g.node_type_name(t).to_owned())
                    .collect()
            }
            CatalogLevel::Names => {
                let t = need_parent()?;
                let ty = g
                    .node_type(t)
                    .ok_or_else(|| Error::UnknownCatalogParent(t.to_owned()))?;
                g.instances_of(ty)
                    .iter()
                    .map(|&v| g.node(v).name.clone())
                    .collect()
            }
        };
        if let Some(k) = keyword.filter(|k| !k.is_empty()) {
            let k = k.to_lowercase();
            entries.retain(|e| e.to_lowercase().contains(&k));
        }
        entries.sort();
        entries.dedup();
        Ok(entries)
    }

    fn submit(&self, id: &str, now: u64) -> Result<ApiResponse> {
        let live = self.live(id)?;
        let mut s = lock(&live);
        s.ensure_open()?;
        s.supersede();
        let line = self.log.session_line(s.session.edges());
        {
            let _w = lock(&self.writer);
            let path = &self.cfg.log_path;
            if !s.session.is_empty() {
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|e| Error::io(path, e))?;
                f.write_all(format!("{line}\n").as_bytes())
                    .and_then(|_| f.sync_all())
                    .map_err(|e| Error::io(path, e))?;
            }
            if let Some(dir) = &self.cfg.archive_dir {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                let p = dir.join(format!("{}.qg", s.id));
                fs::write(&p, s.qg.to_text(&self.graph)).map_err(|e| Error::io(&p, e))?;
            }
        }
        s.closed = true;
        s.updated = now;
        Ok(ApiResponse::Submitted { log_line: line })
    }
}

/// Applies `calls` in order, collecting each outcome as a response or an
/// error message.
pub fn replay_calls(
    service: &SuggestionService,
    calls: &[ApiCall],
) -> Vec<Result<ApiResponse, String>> {
    calls
        .iter()
        .map(|c| service.apply(c).map_err(|e| e.to_string()))
        .collect()
}
