//! Data graph storage, the instance-derived schema index, and neighborhood queries.
//!
//! A [`DataGraph`] is a directed multigraph of typed entities. Edge types are
//! never declared up front: the [`SchemaIndex`] records every
//! `(source type, edge type, target type)` triple witnessed by at least one
//! edge instance, and all schema checks go through it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{EdgeTypeId, NodeIdx, NodeTypeId, Vocabulary};

/// Type names that denote literal values rather than entities.
const ATOMIC_TYPES: &[&str] = &[
    "int", "integer", "float", "double", "decimal", "number", "string", "literal", "bool",
    "boolean", "date", "datetime",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    pub name: String,
    pub domain: String,
    /// Sorted, non-empty.
    pub vtypes: Vec<NodeTypeId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub src: NodeIdx,
    pub dst: NodeIdx,
    pub etype: EdgeTypeId,
}

/// Label of a query-graph node: a specific entity or an entity type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryNodeLabel {
    Entity(NodeIdx),
    Type(NodeTypeId),
}

/// Direction of a candidate edge relative to its anchor node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outgoing,
    Incoming,
}

/// An edge type admissible between two labels, with the directions the schema allows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PassiveCandidate {
    pub etype: EdgeTypeId,
    /// `a -> b` is witnessed.
    pub forward: bool,
    /// `b -> a` is witnessed.
    pub backward: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeEnds {
    pub source_types: BTreeSet<NodeTypeId>,
    pub target_types: BTreeSet<NodeTypeId>,
}

/// Schema constraints derived from instance data.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemaIndex {
    /// (source type, edge type, target type)
    forward: BTreeSet<(NodeTypeId, EdgeTypeId, NodeTypeId)>,
    /// (target type, edge type, source type)
    backward: BTreeSet<(NodeTypeId, EdgeTypeId, NodeTypeId)>,
    ends: Vec<EdgeEnds>,
    outgoing: Vec<BTreeSet<EdgeTypeId>>,
    incoming: Vec<BTreeSet<EdgeTypeId>>,
}

impl SchemaIndex {
    pub fn build(
        nodes: &[NodeRecord],
        edges: &[EdgeRecord],
        n_node_types: usize,
        n_edge_types: usize,
    ) -> Self {
        let mut s = SchemaIndex {
            ends: vec![EdgeEnds::default(); n_edge_types],
            outgoing: vec![BTreeSet::new(); n_node_types],
            incoming: vec![BTreeSet::new(); n_node_types],
            ..Default::default()
        };
        for e in edges {
            let src_types = &nodes[e.src.index()].vtypes;
            let dst_types = &nodes[e.dst.index()].vtypes;
            for &st in src_types {
                s.outgoing[st.index()].insert(e.etype);
                s.ends[e.etype.index()].source_types.insert(st);
                for &dt in dst_types {
                    s.forward.insert((st, e.etype, dt));
                    s.backward.insert((dt, e.etype, st));
                }
            }
            for &dt in dst_types {
                s.incoming[dt.index()].insert(e.etype);
                s.ends[e.etype.index()].target_types.insert(dt);
            }
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = (NodeTypeId, EdgeTypeId, NodeTypeId)> + '_ {
        self.forward.iter().copied()
    }

    pub fn witnesses(&self, src: NodeTypeId, etype: EdgeTypeId, dst: NodeTypeId) -> bool {
        self.forward.contains(&(src, etype, dst))
    }

    pub fn edge_ends(&self, etype: EdgeTypeId) -> Option<&EdgeEnds> {
        self.ends.get(etype.index())
    }

    pub fn outgoing(&self, t: NodeTypeId) -> &BTreeSet<EdgeTypeId> {
        &self.outgoing[t.index()]
    }

    pub fn incoming(&self, t: NodeTypeId) -> &BTreeSet<EdgeTypeId> {
        &self.incoming[t.index()]
    }

    /// Edge types incident on `t` in either direction.
    pub fn incident(&self, t: NodeTypeId) -> BTreeSet<EdgeTypeId> {
        self.outgoing(t).union(self.incoming(t)).copied().collect()
    }

    /// Target types reachable from `src` over `etype`.
    pub fn targets_from(
        &self,
        src: NodeTypeId,
        etype: EdgeTypeId,
    ) -> impl Iterator<Item = NodeTypeId> + '_ {
        self.forward
            .range((src, etype, NodeTypeId(0))..=(src, etype, NodeTypeId(u32::MAX)))
            .map(|&(_, _, d)| d)
    }

    /// Source types that reach `dst` over `etype`.
    pub fn sources_into(
        &self,
        dst: NodeTypeId,
        etype: EdgeTypeId,
    ) -> impl Iterator<Item = NodeTypeId> + '_ {
        self.backward
            .range((dst, etype, NodeTypeId(0))..=(dst, etype, NodeTypeId(u32::MAX)))
            .map(|&(_, _, s)| s)
    }

    /// True if some type in `src` reaches some type in `dst` over `etype`.
    pub fn allows(&self, src: &[NodeTypeId], etype: EdgeTypeId, dst: &[NodeTypeId]) -> bool {
        src.iter()
            .any(|&s| dst.iter().any(|&d| self.witnesses(s, etype, d)))
    }
}

/// Incrementally assembles a [`DataGraph`]; used by the file loader and by generators.
#[derive(Debug, Default)]
pub struct DataGraphBuilder {
    nodes: Vec<NodeRecord>,
    node_index: HashMap<String, NodeIdx>,
    edges: Vec<EdgeRecord>,
    node_types: Vocabulary,
    edge_types: Vocabulary,
    domains: BTreeMap<String, BTreeSet<NodeTypeId>>,
}

impl DataGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node type under a domain without requiring an instance.
    pub fn declare_node_type(&mut self, domain: &str, name: &str) -> Result<NodeTypeId> {
        if is_atomic_type(name) {
            return Err(Error::AtomicValue(name.to_owned()));
        }
        let t = NodeTypeId(self.node_types.intern(name));
        self.domains.entry(domain.to_owned()).or_default().insert(t);
        Ok(t)
    }

    pub fn add_node<S: AsRef<str>>(
        &mut self,
        id: &str,
        name: &str,
        domain: &str,
        types: &[S],
    ) -> Result<NodeIdx> {
        if self.node_index.contains_key(id) {
            return Err(Error::DuplicateNode(id.to_owned()));
        }
        if types.is_empty() {
            return Err(Error::InvalidConfig(format!("node `{id}` has no types")));
        }
        let mut vtypes = Vec::with_capacity(types.len());
        for t in types {
            let t = t.as_ref();
            if is_atomic_type(t) {
                return Err(Error::AtomicValue(id.to_owned()));
            }
            vtypes.push(self.declare_node_type(domain, t)?);
        }
        vtypes.sort_unstable();
        vtypes.dedup();
        let idx = NodeIdx::from(self.nodes.len());
        self.nodes.push(NodeRecord {
            id: id.to_owned(),
            name: name.to_owned(),
            domain: domain.to_owned(),
            vtypes,
        });
        self.node_index.insert(id.to_owned(), idx);
        Ok(idx)
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, etype: &str) -> Result<EdgeTypeId> {
        let s = *self
            .node_index
            .get(src)
            .ok_or_else(|| Error::DanglingEndpoint(src.to_owned()))?;
        let d = *self
            .node_index
            .get(dst)
            .ok_or_else(|| Error::DanglingEndpoint(dst.to_owned()))?;
        let et = EdgeTypeId(self.edge_types.intern(etype));
        self.edges.push(EdgeRecord {
            src: s,
            dst: d,
            etype: et,
        });
        Ok(et)
    }

    pub fn build(self) -> DataGraph {
        DataGraph::assemble(self)
    }
}

fn is_atomic_type(name: &str) -> bool {
    ATOMIC_TYPES.iter().any(|a| a.eq_ignore_ascii_case(name))
}

/// Immutable data graph with its derived indexes.
#[derive(Clone, Debug)]
pub struct DataGraph {
    nodes: Vec<NodeRecord>,
    node_index: HashMap<String, NodeIdx>,
    edges: Vec<EdgeRecord>,
    node_types: Vocabulary,
    edge_types: Vocabulary,
    domains: BTreeMap<String, BTreeSet<NodeTypeId>>,
    incident: Vec<BTreeSet<EdgeTypeId>>,
    type_neighborhood: Vec<BTreeSet<EdgeTypeId>>,
    type_instances: Vec<Vec<NodeIdx>>,
    adjacency: Vec<Vec<(NodeIdx, EdgeTypeId)>>,
    schema: SchemaIndex,
}

impl DataGraph {
    fn assemble(b: DataGraphBuilder) -> Self {
        let n = b.nodes.len();
        let mut incident = vec![BTreeSet::new(); n];
        let mut adjacency = vec![Vec::new(); n];
        for e in &b.edges {
            incident[e.src.index()].insert(e.etype);
            incident[e.dst.index()].insert(e.etype);
            adjacency[e.src.index()].push((e.dst, e.etype));
            if e.src != e.dst {
                adjacency[e.dst.index()].push((e.src, e.etype));
            }
        }
        let mut type_instances = vec![Vec::new(); b.node_types.len()];
        let mut type_neighborhood = vec![BTreeSet::new(); b.node_types.len()];
        for (i, node) in b.nodes.iter().enumerate() {
            for &t in &node.vtypes {
                type_instances[t.index()].push(NodeIdx::from(i));
                type_neighborhood[t.index()].extend(incident[i].iter().copied());
            }
        }
        let schema = SchemaIndex::build(&b.nodes, &b.edges, b.node_types.len(), b.edge_types.len());
        DataGraph {
            nodes: b.nodes,
            node_index: b.node_index,
            edges: b.edges,
            node_types: b.node_types,
            edge_types: b.edge_types,
            domains: b.domains,
            incident,
            type_neighborhood,
            type_instances,
            adjacency,
            schema,
        }
    }

    /// Loads the tab-separated node and edge files.
    ///
    /// Nodes: `id<TAB>name<TAB>domain<TAB>type1,type2,...`.
    /// Edges: `src_id<TAB>dst_id<TAB>edge_type`. Lines starting with `#` are skipped.
    pub fn load(nodes_path: impl AsRef<Path>, edges_path: impl AsRef<Path>) -> Result<Self> {
        let nodes_path = nodes_path.as_ref();
        let edges_path = edges_path.as_ref();
        let nodes_text = fs::read_to_string(nodes_path).map_err(|e| Error::io(nodes_path, e))?;
        let edges_text = fs::read_to_string(edges_path).map_err(|e| Error::io(edges_path, e))?;
        Self::parse(&nodes_text, nodes_path, &edges_text, edges_path)
    }

    pub fn parse(
        nodes_text: &str,
        nodes_path: &Path,
        edges_text: &str,
        edges_path: &Path,
    ) -> Result<Self> {
        let mut b = DataGraphBuilder::new();
        for (lineno, line) in data_lines(nodes_text) {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    nodes_path,
                    lineno,
                    format!("expected 4 tab-separated fields, found {}", fields.len()),
                ));
            }
            let types: Vec<&str> = fields[3]
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect();
            if fields[0].is_empty() || types.is_empty() {
                return Err(Error::parse(
                    nodes_path,
                    lineno,
                    "empty node id or type list",
                ));
            }
            b.add_node(fields[0], fields[1], fields[2], &types)
                .map_err(|e| match e {
                    Error::DuplicateNode(_) | Error::AtomicValue(_) => e,
                    other => Error::parse(nodes_path, lineno, other.to_string()),
                })?;
        }
        for (lineno, line) in data_lines(edges_text) {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::parse(
                    edges_path,
                    lineno,
                    "expected `src<TAB>dst<TAB>edge_type`",
                ));
            }
            b.add_edge(fields[0], fields[1], fields[2])?;
        }
        Ok(b.build())
    }

    /// Node file contents in the format read by [`DataGraph::load`].
    pub fn nodes_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let types: Vec<&str> = n.vtypes.iter().map(|&t| self.node_type_name(t)).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                n.id,
                n.name,
                n.domain,
                types.join(",")
            ));
        }
        out
    }

    /// Edge file contents in the format read by [`DataGraph::load`].
    pub fn edges_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                self.nodes[e.src.index()].id,
                self.nodes[e.dst.index()].id,
                self.edge_type_name(e.etype)
            ));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn node(&self, v: NodeIdx) -> &NodeRecord {
        &self.nodes[v.index()]
    }

    pub fn node_by_id(&self, id: &str) -> Option<NodeIdx> {
        self.node_index.get(id).copied()
    }

    pub fn node_types(&self) -> &Vocabulary {
        &self.node_types
    }

    pub fn edge_types(&self) -> &Vocabulary {
        &self.edge_types
    }

    pub fn node_type(&self, name: &str) -> Option<NodeTypeId> {
        self.node_types.get(name).map(NodeTypeId)
    }

    pub fn edge_type(&self, name: &str) -> Option<EdgeTypeId> {
        self.edge_types.get(name).map(EdgeTypeId)
    }

    pub fn node_type_name(&self, t: NodeTypeId) -> &str {
        self.node_types.name(t.0)
    }

    pub fn edge_type_name(&self, e: EdgeTypeId) -> &str {
        self.edge_types.name(e.0)
    }

    pub fn domains(&self) -> &BTreeMap<String, BTreeSet<NodeTypeId>> {
        &self.domains
    }

    pub fn instances_of(&self, t: NodeTypeId) -> &[NodeIdx] {
        &self.type_instances[t.index()]
    }

    /// Undirected neighbor list of `v` with the connecting edge type.
    pub fn neighbors(&self, v: NodeIdx) -> &[(NodeIdx, EdgeTypeId)] {
        &self.adjacency[v.index()]
    }

    pub fn schema(&self) -> &SchemaIndex {
        &self.schema
    }

    /// Rebuilds the schema index from the stored instance data.
    pub fn rebuild_schema(&self) -> SchemaIndex {
        SchemaIndex::build(
            &self.nodes,
            &self.edges,
            self.node_types.len(),
            self.edge_types.len(),
        )
    }

    /// Types of all edges incident on `v`, either direction.
    pub fn incident_edge_types(&self, v: NodeIdx) -> Result<&BTreeSet<EdgeTypeId>> {
        self.incident
            .get(v.index())
            .ok_or_else(|| Error::UnknownNode(v.to_string()))
    }

    pub fn check_label(&self, label: &QueryNodeLabel) -> Result<()> {
        match *label {
            QueryNodeLabel::Entity(v) if v.index() >= self.nodes.len() => {
                Err(Error::UnknownNode(v.to_string()))
            }
            QueryNodeLabel::Type(t) if t.index() >= self.node_types.len() => {
                Err(Error::UnknownNodeType(t.to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Neighboring candidate edge types of a query-node label.
    ///
    /// For an entity this is its incident edge types; for a type it is the union
    /// over every instance of that type.
    pub fn neighboring_candidate_edges(
        &self,
        label: &QueryNodeLabel,
    ) -> Result<&BTreeSet<EdgeTypeId>> {
        self.check_label(label)?;
        Ok(match *label {
            QueryNodeLabel::Entity(v) => &self.incident[v.index()],
            QueryNodeLabel::Type(t) => &self.type_neighborhood[t.index()],
        })
    }

    /// Node types a label stands for.
    pub fn label_types<'a>(&'a self, label: &'a QueryNodeLabel) -> &'a [NodeTypeId] {
        match label {
            QueryNodeLabel::Entity(v) => &self.nodes[v.index()].vtypes,
            QueryNodeLabel::Type(t) => std::slice::from_ref(t),
        }
    }

    pub fn label_display(&self, label: &QueryNodeLabel) -> String {
        match *label {
            QueryNodeLabel::Entity(v) => self.nodes[v.index()].name.clone(),
            QueryNodeLabel::Type(t) => self.node_type_name(t).to_owned(),
        }
    }

    /// Parses `name|type` plus a label string. Entities resolve by node id first, then by name.
    pub fn resolve_label(&self, kind: &str, label: &str) -> Result<QueryNodeLabel> {
        match kind {
            "type" => self
                .node_type(label)
                .map(QueryNodeLabel::Type)
                .ok_or_else(|| Error::UnknownNodeType(label.to_owned())),
            "name" => self
                .node_by_id(label)
                .or_else(|| {
                    self.nodes
                        .iter()
                        .position(|n| n.name == label)
                        .map(NodeIdx::from)
                })
                .map(QueryNodeLabel::Entity)
                .ok_or_else(|| Error::UnknownNode(label.to_owned())),
            other => Err(Error::InvalidConfig(format!(
                "node label kind must be `name` or `type`, got `{other}`"
            ))),
        }
    }

    /// Edge types that may connect `a` and `b` in the passive mode: the
    /// intersection of both neighborhoods, restricted to types the schema
    /// witnesses in at least one direction between the two labels.
    pub fn passive_candidates(
        &self,
        a: &QueryNodeLabel,
        b: &QueryNodeLabel,
    ) -> Result<Vec<PassiveCandidate>> {
        let na = self.neighboring_candidate_edges(a)?;
        let nb = self.neighboring_candidate_edges(b)?;
        let ta = self.label_types(a);
        let tb = self.label_types(b);
        Ok(na
            .intersection(nb)
            .filter_map(|&etype| {
                let forward = self.schema.allows(ta, etype, tb);
                let backward = self.schema.allows(tb, etype, ta);
                (forward || backward).then_some(PassiveCandidate {
                    etype,
                    forward,
                    backward,
                })
            })
            .collect())
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tom_cruise() -> DataGraph {
        let mut b = DataGraphBuilder::new();
        b.add_node("TomCruise", "Tom Cruise", "film", &["Person", "FilmActor"])
            .unwrap();
        b.add_node("TopGun", "Top Gun", "film", &["Film"]).unwrap();
        b.add_edge("TomCruise", "TopGun", "starring").unwrap();
        b.build()
    }

    #[test]
    fn text_round_trip() {
        let g = tom_cruise();
        let h = DataGraph::parse(
            &g.nodes_text(),
            Path::new("n"),
            &g.edges_text(),
            Path::new("e"),
        )
        .unwrap();
        assert_eq!(h.nodes(), g.nodes());
        assert_eq!(h.edges(), g.edges());
        assert_eq!(h.schema(), g.schema());
    }

    #[test]
    fn parses_two_node_graph() {
        let g = DataGraph::parse(
            "# nodes\nTomCruise\tTom Cruise\tfilm\tPerson,FilmActor\nTopGun\tTop Gun\tfilm\tFilm\n",
            Path::new("n.tsv"),
            "TomCruise\tTopGun\tstarring\n",
            Path::new("e.tsv"),
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_types().len(), 1);
        assert_eq!(g.edge_types().name(0), "starring");
    }

    #[test]
    fn empty_edge_file_gives_empty_schema() {
        let g = DataGraph::parse("a\tA\td\tT\n", Path::new("n"), "", Path::new("e")).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.schema().is_empty());
    }

    #[test]
    fn dangling_endpoint_names_the_id() {
        let err = DataGraph::parse(
            "a\tA\td\tT\n",
            Path::new("n"),
            "a\tghost\tknows\n",
            Path::new("e"),
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::DanglingEndpoint(ref id) if id == "ghost"),
            "{err}"
        );
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = DataGraph::parse(
            "a\tA\td\tT\nbroken line\n",
            Path::new("n"),
            "",
            Path::new("e"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn duplicate_and_atomic_nodes_rejected() {
        let err = DataGraph::parse(
            "a\tA\td\tT\na\tB\td\tT\n",
            Path::new("n"),
            "",
            Path::new("e"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateNode(_)));
        let err = DataGraph::parse("42\t42\tnum\tinteger\n", Path::new("n"), "", Path::new("e"))
            .unwrap_err();
        assert!(matches!(err, Error::AtomicValue(_)));
    }

    #[test]
    fn incident_edge_types_cases() {
        let g = tom_cruise();
        let tc = g.node_by_id("TomCruise").unwrap();
        let starring = g.edge_type("starring").unwrap();
        assert_eq!(
            g.incident_edge_types(tc)
                .unwrap()
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            vec![starring]
        );

        let mut b = DataGraphBuilder::new();
        b.add_node("x", "x", "d", &["T"]).unwrap();
        b.add_node("y", "y", "d", &["T"]).unwrap();
        b.add_node("lonely", "lonely", "d", &["T"]).unwrap();
        b.add_edge("x", "y", "e1").unwrap();
        b.add_edge("y", "x", "e1").unwrap();
        let g = b.build();
        let x = g.node_by_id("x").unwrap();
        assert_eq!(g.incident_edge_types(x).unwrap().len(), 1);
        assert!(g
            .incident_edge_types(g.node_by_id("lonely").unwrap())
            .unwrap()
            .is_empty());
        assert!(g.incident_edge_types(NodeIdx(99)).is_err());
    }

    #[test]
    fn neighborhoods_by_entity_and_type() {
        let mut b = DataGraphBuilder::new();
        b.add_node("tc", "Tom Cruise", "film", &["Person", "FilmActor"])
            .unwrap();
        b.add_node("tg", "Top Gun", "film", &["Film"]).unwrap();
        b.add_node("mi", "Mission Impossible", "film", &["Film"])
            .unwrap();
        b.add_node("fest", "Cannes", "film", &["Festival"]).unwrap();
        b.declare_node_type("film", "Studio").unwrap();
        b.add_edge("tc", "tg", "starring").unwrap();
        b.add_edge("mi", "fest", "featured_in").unwrap();
        let g = b.build();
        let starring = g.edge_type("starring").unwrap();
        let featured = g.edge_type("featured_in").unwrap();

        let tc = QueryNodeLabel::Entity(g.node_by_id("tc").unwrap());
        assert_eq!(
            g.neighboring_candidate_edges(&tc).unwrap(),
            &BTreeSet::from([starring])
        );
        let film = QueryNodeLabel::Type(g.node_type("Film").unwrap());
        assert_eq!(
            g.neighboring_candidate_edges(&film).unwrap(),
            &BTreeSet::from([starring, featured])
        );
        let studio = QueryNodeLabel::Type(g.node_type("Studio").unwrap());
        assert!(g.neighboring_candidate_edges(&studio).unwrap().is_empty());
        assert!(g
            .neighboring_candidate_edges(&QueryNodeLabel::Type(NodeTypeId(77)))
            .is_err());
    }

    #[test]
    fn passive_candidates_cases() {
        let g = tom_cruise();
        let actor = QueryNodeLabel::Type(g.node_type("FilmActor").unwrap());
        let film = QueryNodeLabel::Type(g.node_type("Film").unwrap());
        let starring = g.edge_type("starring").unwrap();
        let pc = g.passive_candidates(&actor, &film).unwrap();
        assert_eq!(
            pc,
            vec![PassiveCandidate {
                etype: starring,
                forward: true,
                backward: false
            }]
        );
        let rev = g.passive_candidates(&film, &actor).unwrap();
        assert!(rev[0].backward && !rev[0].forward);
        // self-pair: starring never goes Film -> Film
        assert!(g.passive_candidates(&film, &film).unwrap().is_empty());

        let mut b = DataGraphBuilder::new();
        b.add_node("p", "p", "d", &["Person"]).unwrap();
        b.add_node("q", "q", "d", &["Person"]).unwrap();
        b.add_node("c", "c", "d", &["City"]).unwrap();
        b.add_node("f", "f", "d", &["Film"]).unwrap();
        b.add_edge("p", "q", "spouse").unwrap();
        b.add_edge("p", "c", "born_in").unwrap();
        b.add_edge("f", "c", "shot_in").unwrap();
        let g = b.build();
        let person = QueryNodeLabel::Type(g.node_type("Person").unwrap());
        let film = QueryNodeLabel::Type(g.node_type("Film").unwrap());
        assert!(g.passive_candidates(&person, &film).unwrap().is_empty());
        let selfpair = g.passive_candidates(&person, &person).unwrap();
        assert_eq!(selfpair.len(), 1);
        assert_eq!(selfpair[0].etype, g.edge_type("spouse").unwrap());
        assert!(selfpair[0].forward && selfpair[0].backward);
    }

    #[test]
    fn schema_rebuild_is_idempotent() {
        let g = tom_cruise();
        assert_eq!(&g.rebuild_schema(), g.schema());
        let s = g.schema();
        let actor = g.node_type("FilmActor").unwrap();
        let film = g.node_type("Film").unwrap();
        let starring = g.edge_type("starring").unwrap();
        assert!(s.witnesses(actor, starring, film));
        assert!(!s.witnesses(film, starring, actor));
        assert_eq!(
            s.targets_from(actor, starring).collect::<Vec<_>>(),
            vec![film]
        );
        assert_eq!(s.sources_into(film, starring).count(), 2);
    }
}
