//! Query-log simulation: positive co-occurrence pipelines and negative injection.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::DataGraph;
use crate::query::SignedEdge;
use crate::querylog::{apriori::frequent_itemsets, QueryLog};
use crate::vocab::{EdgeTypeId, NodeIdx, NodeTypeId};

/// Support thresholds are absolute session counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimulationConfig {
    /// Threshold for the entity co-occurrence pipeline.
    pub rho_w: usize,
    /// Threshold for the data-graph pipeline.
    pub rho_d: usize,
    pub max_itemset_size: usize,
}

impl SimulationConfig {
    pub const DEFAULT_MAX_ITEMSET_SIZE: usize = 5;

    pub fn new(rho_w: usize, rho_d: usize) -> Result<Self> {
        let cfg = SimulationConfig {
            rho_w,
            rho_d,
            max_itemset_size: Self::DEFAULT_MAX_ITEMSET_SIZE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho_w == 0 || self.rho_d == 0 {
            return Err(Error::InvalidConfig(
                "support thresholds must be >= 1".into(),
            ));
        }
        if self.max_itemset_size == 0 {
            return Err(Error::InvalidConfig("max_itemset_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Entities mentioned together in one text window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityWindow(pub Vec<String>);

/// One window per line, space-separated node ids.
pub fn parse_windows(text: &str) -> Vec<EntityWindow> {
    text.lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|w| !w.is_empty())
        .map(EntityWindow)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub windows: usize,
    pub skipped_entities: usize,
    pub skipped_windows: usize,
}

fn log_from_itemsets(
    g: &DataGraph,
    itemsets: &[Vec<EdgeTypeId>],
    support: usize,
    max: usize,
) -> QueryLog {
    let mut log = QueryLog::new(g.edge_types().clone());
    for (set, _) in frequent_itemsets(itemsets, support, max) {
        if set.len() >= 2 {
            log.push_session(set.into_iter().map(SignedEdge::pos));
        }
    }
    log
}

/// One itemset per node (its incident edge types), mined at `rho_d`.
pub fn datapos_simulate(g: &DataGraph, cfg: &SimulationConfig) -> Result<QueryLog> {
    cfg.validate()?;
    let itemsets: Vec<Vec<EdgeTypeId>> = (0..g.node_count())
        .map(|i| {
            g.incident_edge_types(NodeIdx::from(i))
                .map(|s| s.iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    Ok(log_from_itemsets(
        g,
        &itemsets,
        cfg.rho_d,
        cfg.max_itemset_size,
    ))
}

/// One itemset per window: the types of all data-graph edges between any two
/// of its entities. Mined at `rho_w`. Unknown entity ids are skipped and counted.
pub fn cooccurrence_ingest(
    windows: &[EntityWindow],
    g: &DataGraph,
    cfg: &SimulationConfig,
) -> Result<(QueryLog, IngestReport)> {
    cfg.validate()?;
    let mut report = IngestReport {
        windows: windows.len(),
        ..Default::default()
    };
    let mut itemsets = Vec::with_capacity(windows.len());
    for w in windows {
        let mut members = HashSet::new();
        for id in &w.0 {
            match g.node_by_id(id) {
                Some(v) => {
                    members.insert(v);
                }
                None => report.skipped_entities += 1,
            }
        }
        if members.len() < 2 {
            report.skipped_windows += 1;
            continue;
        }
        let mut types = BTreeSet::new();
        for &v in &members {
            for &(u, et) in g.neighbors(v) {
                if u != v && members.contains(&u) {
                    types.insert(et);
                }
            }
        }
        itemsets.push(types.into_iter().collect::<Vec<_>>());
    }
    Ok((
        log_from_itemsets(g, &itemsets, cfg.rho_w, cfg.max_itemset_size),
        report,
    ))
}

/// Reads positive edge-type sets, one session per line, without pruning.
pub fn import_positive_sets(path: impl AsRef<Path>, g: &DataGraph) -> Result<QueryLog> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_positive_sets(&text, path, g)
}

pub fn parse_positive_sets(text: &str, path: &Path, g: &DataGraph) -> Result<QueryLog> {
    let mut log = QueryLog::new(g.edge_types().clone());
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let mut edges = Vec::with_capacity(toks.len());
        for t in toks {
            let et = g
                .edge_type(t)
                .ok_or_else(|| Error::parse(path, i + 1, format!("unknown edge type `{t}`")))?;
            edges.push(SignedEdge::pos(et));
        }
        log.push_session(edges);
    }
    Ok(log)
}

/// Adds, to every session, the negative form of each edge type incident on
/// a node type touched by the session's edges and absent from the session.
///
/// Node types and incidence come from the schema index. With `cap`, at most
/// that many negatives (lowest edge-type ids first) are added per session.
pub fn inject_negatives(log: &QueryLog, g: &DataGraph, cap: Option<usize>) -> Result<QueryLog> {
    let schema = g.schema();
    let n_types = g.edge_types().len();
    let mut out = QueryLog::new(log.vocab().clone());
    for w in log.sessions() {
        let mut present: BTreeSet<EdgeTypeId> = BTreeSet::new();
        let mut touched: BTreeSet<NodeTypeId> = BTreeSet::new();
        for e in w.iter().filter(|e| e.is_positive()) {
            if e.etype.index() >= n_types {
                return Err(Error::UnknownEdgeType(
                    log.vocab().name(e.etype.0).to_owned(),
                ));
            }
            present.insert(e.etype);
            let ends = schema
                .edge_ends(e.etype)
                .expect("edge type within graph vocabulary");
            touched.extend(ends.source_types.iter().copied());
            touched.extend(ends.target_types.iter().copied());
        }
        let mut negatives: BTreeSet<EdgeTypeId> = BTreeSet::new();
        for &t in &touched {
            negatives.extend(schema.outgoing(t).iter().copied());
            negatives.extend(schema.incoming(t).iter().copied());
        }
        let injected = negatives
            .into_iter()
            .filter(|e| !present.contains(e))
            .take(cap.unwrap_or(usize::MAX))
            .map(SignedEdge::neg);
        out.push_session(w.iter().copied().chain(injected));
    }
    Ok(out)
}
