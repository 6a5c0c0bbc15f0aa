//! Synthetic completion benchmark with planted edge correlations.
//!
//! The schema is a set of disjoint star-shaped groups. Every group has a hub
//! type and a number of slots; each slot offers two alternative edge types
//! (variants) between the hub and a slot-specific leaf type. Hubs and leaves
//! also carry distractor edge types to noise types that no query uses.
//!
//! Each group owns a few templates: a choice of slots and one variant per
//! slot. Log sessions realize a template with random dropout and variant
//! flips, and then get schema-adjacent unused edge types as negatives via
//! [`inject_negatives`]. Targets are templates. Because templates overlap,
//! the initial edge alone rarely identifies the template; what the user
//! rejects along the way does.
//!
//! Every edge type joins a unique pair of node types, and every node type
//! appears at most once per target, so each target edge can always be
//! offered as a candidate once one of its endpoints is present.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DataGraph, DataGraphBuilder, QueryNodeLabel};
use crate::query::{LocalId, QueryEdge, QueryGraph, QueryNode, SignedEdge};
use crate::querylog::{inject_negatives, QueryLog};
use crate::vocab::EdgeTypeId;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub groups: usize,
    /// Slots per group; each slot has two variant edge types.
    pub slots: usize,
    pub hub_distractors: usize,
    /// Distractor edge types per leaf type.
    pub leaf_distractors: usize,
    pub templates_per_group: usize,
    pub min_template_edges: usize,
    pub max_template_edges: usize,
    pub sessions: usize,
    /// Probability that a template edge is left out of a session.
    pub dropout: f64,
    /// Probability that a slot uses its other variant in a session.
    pub flip: f64,
    /// Fraction of sessions made of random group edges instead of a template.
    pub noise_sessions: f64,
    pub targets: usize,
    pub instances_per_type: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            groups: 8,
            slots: 8,
            hub_distractors: 4,
            leaf_distractors: 1,
            templates_per_group: 6,
            min_template_edges: 3,
            max_template_edges: 5,
            sessions: 1200,
            dropout: 0.15,
            flip: 0.1,
            noise_sessions: 0.05,
            targets: 36,
            instances_per_type: 2,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.groups == 0 || self.templates_per_group == 0 || self.instances_per_type == 0 {
            return bad("groups, templates_per_group and instances_per_type must be >= 1");
        }
        if self.min_template_edges < 2
            || self.min_template_edges > self.max_template_edges
            || self.max_template_edges > self.slots
        {
            return bad("need 2 <= min_template_edges <= max_template_edges <= slots");
        }
        for p in [self.dropout, self.flip, self.noise_sessions] {
            if !(0.0..1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1)");
            }
        }
        Ok(())
    }
}

/// One slot edge: variant `v` of slot `s` in a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct SlotEdge {
    etype: EdgeTypeId,
    /// Whether the edge points from the hub to the leaf.
    outward: bool,
    leaf_type: usize,
}

struct Group {
    hub_type: usize,
    /// `slots[s][v]`
    slots: Vec<[SlotEdge; 2]>,
    /// `(slot, variant)` choices.
    templates: Vec<Vec<(usize, usize)>>,
}

pub struct SynthBenchmark {
    pub graph: DataGraph,
    pub log: QueryLog,
    pub targets: Vec<(String, QueryGraph)>,
}

fn fresh_name(rng: &mut ChaCha8Rng, used: &mut BTreeSet<String>) -> String {
    loop {
        let s: String = (0..7)
            .map(|_| char::from(b'a' + rng.random_range(0..26u8)))
            .collect();
        if used.insert(s.clone()) {
            return s;
        }
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthBenchmark> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut names = BTreeSet::new();
    let mut b = DataGraphBuilder::new();
    let mut type_names: Vec<String> = Vec::new();
    let mut pending_edges: Vec<(usize, usize, String)> = Vec::new();
    let new_type = |name: String, type_names: &mut Vec<String>| {
        type_names.push(name);
        type_names.len() - 1
    };

    let mut groups = Vec::with_capacity(cfg.groups);
    for gi in 0..cfg.groups {
        let hub = new_type(format!("G{gi}Hub"), &mut type_names);
        let mut edge = |src: usize, dst: usize, pending: &mut Vec<(usize, usize, String)>| {
            let name = fresh_name(&mut rng, &mut names);
            pending.push((src, dst, name));
            pending.len() - 1
        };
        let mut slot_specs = Vec::with_capacity(cfg.slots);
        for s in 0..cfg.slots {
            let mut pair = Vec::with_capacity(2);
            for v in 0..2 {
                let leaf = new_type(format!("G{gi}S{s}V{v}"), &mut type_names);
                pair.push((leaf, s % 2 == 0));
            }
            slot_specs.push(pair);
        }
        let mut slots = Vec::with_capacity(cfg.slots);
        let mut leaf_ids = Vec::new();
        for pair in &slot_specs {
            let mut variants = Vec::with_capacity(2);
            for &(leaf, outward) in pair {
                let k = if outward {
                    edge(hub, leaf, &mut pending_edges)
                } else {
                    edge(leaf, hub, &mut pending_edges)
                };
                variants.push((k, outward, leaf));
                leaf_ids.push(leaf);
            }
            slots.push(variants);
        }
        for k in 0..cfg.hub_distractors {
            let noise = new_type(format!("G{gi}HubNoise{k}"), &mut type_names);
            edge(hub, noise, &mut pending_edges);
        }
        for &leaf in &leaf_ids {
            for k in 0..cfg.leaf_distractors {
                let noise = new_type(format!("{}Noise{k}", type_names[leaf]), &mut type_names);
                edge(leaf, noise, &mut pending_edges);
            }
        }
        let mut templates = Vec::with_capacity(cfg.templates_per_group);
        for _ in 0..cfg.templates_per_group {
            let size = rng.random_range(cfg.min_template_edges..=cfg.max_template_edges);
            let mut chosen: Vec<usize> = sample(&mut rng, cfg.slots, size).into_vec();
            chosen.sort_unstable();
            templates.push(
                chosen
                    .into_iter()
                    .map(|s| (s, rng.random_range(0..2usize)))
                    .collect(),
            );
        }
        groups.push((hub, slots, templates));
    }

    // materialize the data graph: every type gets instances, every edge type
    // links instance i of its source type to instance i of its target type
    for name in &type_names {
        let domain = format!(
            "g{}",
            name[1..]
                .split(|c: char| !c.is_ascii_digit())
                .next()
                .unwrap_or("0")
        );
        for i in 0..cfg.instances_per_type {
            b.add_node(
                &format!("{name}_{i}"),
                &format!("{name} {i}"),
                &domain,
                &[name.as_str()],
            )?;
        }
    }
    let mut etype_ids = Vec::with_capacity(pending_edges.len());
    for (src, dst, name) in &pending_edges {
        let mut id = None;
        for i in 0..cfg.instances_per_type {
            id = Some(b.add_edge(
                &format!("{}_{i}", type_names[*src]),
                &format!("{}_{i}", type_names[*dst]),
                name,
            )?);
        }
        etype_ids.push(id.expect("instances_per_type >= 1"));
    }
    let graph = b.build();
    let ty = |t: usize| graph.node_type(&type_names[t]).expect("declared type");

    let groups: Vec<Group> = groups
        .into_iter()
        .map(|(hub, slots, templates)| Group {
            hub_type: hub,
            slots: slots
                .into_iter()
                .map(|v| {
                    let mk = |(k, outward, leaf): (usize, bool, usize)| SlotEdge {
                        etype: etype_ids[k],
                        outward,
                        leaf_type: leaf,
                    };
                    [mk(v[0]), mk(v[1])]
                })
                .collect(),
            templates,
        })
        .collect();

    let mut positives = QueryLog::new(graph.edge_types().clone());
    for _ in 0..cfg.sessions {
        let g = groups.choose(&mut rng).expect("groups >= 1");
        let mut edges: Vec<SignedEdge> = Vec::new();
        if rng.random_bool(cfg.noise_sessions) {
            let size = rng.random_range(2..=cfg.max_template_edges.min(cfg.slots));
            for s in sample(&mut rng, cfg.slots, size) {
                edges.push(SignedEdge::pos(
                    g.slots[s][rng.random_range(0..2usize)].etype,
                ));
            }
        } else {
            let t = g.templates.choose(&mut rng).expect("templates >= 1");
            loop {
                edges.clear();
                for &(s, v) in t {
                    if rng.random_bool(cfg.dropout) {
                        continue;
                    }
                    let v = if rng.random_bool(cfg.flip) { 1 - v } else { v };
                    edges.push(SignedEdge::pos(g.slots[s][v].etype));
                }
                if edges.len() >= 2 {
                    break;
                }
            }
        }
        positives.push_session(edges);
    }
    let log = inject_negatives(&positives, &graph, None)?;

    let mut pairs: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|g| (0..groups[g].templates.len()).map(move |t| (g, t)))
        .collect();
    let mut targets = Vec::with_capacity(cfg.targets);
    for i in 0..cfg.targets {
        if pairs.is_empty() {
            pairs = (0..groups.len())
                .flat_map(|g| (0..groups[g].templates.len()).map(move |t| (g, t)))
                .collect();
        }
        let (gi, ti) = pairs.swap_remove(rng.random_range(0..pairs.len()));
        let g = &groups[gi];
        let hub = LocalId(0);
        let mut nodes = vec![QueryNode {
            id: hub,
            label: QueryNodeLabel::Type(ty(g.hub_type)),
        }];
        let mut edges = Vec::new();
        for &(s, v) in &g.templates[ti] {
            let se = g.slots[s][v];
            let leaf = LocalId(nodes.len() as u32);
            nodes.push(QueryNode {
                id: leaf,
                label: QueryNodeLabel::Type(ty(se.leaf_type)),
            });
            let (src, dst) = if se.outward { (hub, leaf) } else { (leaf, hub) };
            edges.push(QueryEdge {
                src,
                dst,
                etype: se.etype,
            });
        }
        targets.push((
            format!("t{i:03}"),
            QueryGraph::from_parts(&graph, nodes, edges)?,
        ));
    }
    Ok(SynthBenchmark {
        graph,
        log,
        targets,
    })
}

impl SynthBenchmark {
    /// Writes `nodes.tsv`, `edges.tsv`, `log.txt` and `targets/*.qg` under `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let tdir = dir.join("targets");
        fs::create_dir_all(&tdir).map_err(|e| Error::io(&tdir, e))?;
        let put = |p: &Path, text: String| fs::write(p, text).map_err(|e| Error::io(p, e));
        put(&dir.join("nodes.tsv"), self.graph.nodes_text())?;
        put(&dir.join("edges.tsv"), self.graph.edges_text())?;
        self.log.save(dir.join("log.txt"))?;
        for (name, t) in &self.targets {
            put(&tdir.join(format!("{name}.qg")), t.to_text(&self.graph))?;
        }
        Ok(())
    }

    /// Number of hub-side edge types in the schema.
    pub fn edge_type_count(&self) -> usize {
        self.graph.edge_types().len()
    }
}
