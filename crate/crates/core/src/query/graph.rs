use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataGraph, QueryNodeLabel};
use crate::vocab::EdgeTypeId;

/// Identifier of a node inside one query graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocalId(pub u32);

impl std::fmt::Display for LocalId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryNode {
    pub id: LocalId,
    pub label: QueryNodeLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QueryEdge {
    pub src: LocalId,
    pub dst: LocalId,
    pub etype: EdgeTypeId,
}

/// A small directed multigraph over node names and types.
///
/// Connected at all times, except right after [`QueryGraph::add_node`] on a
/// non-empty graph: the new node then waits for an edge that attaches it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryGraph {
    nodes: Vec<QueryNode>,
    edges: Vec<QueryEdge>,
    pending: bool,
}

impl QueryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from explicit parts, checking labels, edge types and endpoints.
    pub fn from_parts(g: &DataGraph, nodes: Vec<QueryNode>, edges: Vec<QueryEdge>) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            g.check_label(&n.label)?;
            if nodes[..i].iter().any(|m| m.id == n.id) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate query node id {}",
                    n.id
                )));
            }
        }
        let mut qg = QueryGraph {
            nodes,
            edges: Vec::with_capacity(edges.len()),
            pending: false,
        };
        for e in edges {
            qg.position(e.src)?;
            qg.position(e.dst)?;
            if e.etype.index() >= g.edge_types().len() {
                return Err(Error::UnknownEdgeType(e.etype.to_string()));
            }
            qg.edges.push(e);
        }
        qg.pending = !qg.is_connected();
        Ok(qg)
    }

    /// Builds a graph without consulting a data graph. Only structural
    /// checks apply: node ids must be unique and edges must reference them.
    pub fn from_raw(nodes: Vec<QueryNode>, edges: Vec<QueryEdge>) -> Self {
        let mut qg = QueryGraph {
            nodes,
            edges,
            pending: false,
        };
        assert!(
            qg.edges
                .iter()
                .all(|e| qg.contains(e.src) && qg.contains(e.dst)),
            "edge references a missing query node"
        );
        qg.pending = !qg.is_connected();
        qg
    }

    pub fn nodes(&self) -> &[QueryNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[QueryEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_pending_connection(&self) -> bool {
        self.pending
    }

    pub fn label(&self, id: LocalId) -> Result<QueryNodeLabel> {
        Ok(self.nodes[self.position(id)?].label)
    }

    pub fn contains(&self, id: LocalId) -> bool {
        self.nodes.iter().any(|n| n.id == id)
    }

    fn position(&self, id: LocalId) -> Result<usize> {
        self.nodes
            .iter()
            .position(|n| n.id == id)
            .ok_or(Error::UnknownLocalNode(id.0))
    }

    fn next_id(&self) -> LocalId {
        LocalId(self.nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0))
    }

    /// Appends a node. On a non-empty graph the result is pending-connection.
    pub fn add_node(&mut self, g: &DataGraph, label: QueryNodeLabel) -> Result<LocalId> {
        g.check_label(&label)?;
        if self.pending {
            return Err(Error::PendingConnection);
        }
        let id = self.next_id();
        self.nodes.push(QueryNode { id, label });
        self.pending = self.nodes.len() > 1;
        Ok(id)
    }

    /// Appends `src -[etype]-> dst` after checking it against the schema.
    pub fn add_edge(
        &mut self,
        g: &DataGraph,
        src: LocalId,
        dst: LocalId,
        etype: EdgeTypeId,
    ) -> Result<()> {
        let a = self.label(src)?;
        let b = self.label(dst)?;
        let ok = g
            .passive_candidates(&a, &b)?
            .iter()
            .any(|c| c.etype == etype && c.forward);
        if !ok {
            return Err(Error::SchemaIncompatible {
                etype: g
                    .edge_types()
                    .try_name(etype.0)
                    .unwrap_or("<unknown>")
                    .to_owned(),
                src: g.label_display(&a),
                dst: g.label_display(&b),
            });
        }
        self.edges.push(QueryEdge { src, dst, etype });
        if self.pending {
            self.pending = !self.is_connected();
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.len() <= 1 {
            return true;
        }
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = n;
        for e in &self.edges {
            let a = self.nodes.iter().position(|m| m.id == e.src).unwrap();
            let b = self.nodes.iter().position(|m| m.id == e.dst).unwrap();
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        components == 1
    }

    /// Parses the `#nodes` / `#edges` text format.
    pub fn parse(g: &DataGraph, text: &str, path: &Path) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Start,
            Nodes,
            Edges,
        }
        let mut section = Section::Start;
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            match line.trim() {
                "#nodes" => {
                    section = Section::Nodes;
                    continue;
                }
                "#edges" => {
                    section = Section::Edges;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match section {
                Section::Start => {
                    return Err(Error::parse(path, lineno, "expected `#nodes` header"));
                }
                Section::Nodes => {
                    if fields.len() != 3 {
                        return Err(Error::parse(
                            path,
                            lineno,
                            "expected `local_id<TAB>kind<TAB>label`",
                        ));
                    }
                    let id = parse_local(fields[0]).ok_or_else(|| {
                        Error::parse(path, lineno, format!("bad local id `{}`", fields[0]))
                    })?;
                    let label = g
                        .resolve_label(fields[1], fields[2])
                        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                    nodes.push(QueryNode { id, label });
                }
                Section::Edges => {
                    if fields.len() != 3 {
                        return Err(Error::parse(
                            path,
                            lineno,
                            "expected `src<TAB>dst<TAB>etype`",
                        ));
                    }
                    let src = parse_local(fields[0])
                        .ok_or_else(|| Error::parse(path, lineno, "bad source id"))?;
                    let dst = parse_local(fields[1])
                        .ok_or_else(|| Error::parse(path, lineno, "bad target id"))?;
                    let etype = g.edge_type(fields[2]).ok_or_else(|| {
                        Error::parse(path, lineno, format!("unknown edge type `{}`", fields[2]))
                    })?;
                    edges.push(QueryEdge { src, dst, etype });
                }
            }
        }
        Self::from_parts(g, nodes, edges).map_err(|e| Error::parse(path, 0, e.to_string()))
    }

    pub fn load(g: &DataGraph, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(g, &text, path)
    }

    pub fn to_text(&self, g: &DataGraph) -> String {
        let mut out = String::from("#nodes\n");
        for n in &self.nodes {
            let (kind, label) = match n.label {
                QueryNodeLabel::Entity(v) => ("name", g.node(v).id.as_str()),
                QueryNodeLabel::Type(t) => ("type", g.node_type_name(t)),
            };
            let _ = writeln!(out, "{}\t{kind}\t{label}", n.id);
        }
        out.push_str("#edges\n");
        for e in &self.edges {
            let _ = writeln!(out, "{}\t{}\t{}", e.src, e.dst, g.edge_type_name(e.etype));
        }
        out
    }
}

fn parse_local(s: &str) -> Option<LocalId> {
    s.trim().parse().ok().map(LocalId)
}
