//! Query logs: storage, inverted index, support counting, persistence, and
//! the simulators that bootstrap a log when no real one exists.

pub mod apriori;
pub mod simulate;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::query::{QuerySession, SignedEdge};
use crate::vocab::{EdgeTypeId, Vocabulary};

pub use apriori::frequent_itemsets;
pub use simulate::{
    cooccurrence_ingest, datapos_simulate, import_positive_sets, inject_negatives,
    parse_positive_sets, parse_windows, EntityWindow, IngestReport, SimulationConfig,
};

/// A multiset of sessions, each an unordered set of signed edges.
///
/// Session ids are dense. The log owns an edge-type vocabulary; when it is
/// used next to a data graph the vocabulary extends the graph's, so ids agree.
#[derive(Clone, Debug, Default)]
pub struct QueryLog {
    vocab: Vocabulary,
    sessions: Vec<Vec<SignedEdge>>,
    postings: HashMap<SignedEdge, Vec<u32>>,
}

impl PartialEq for QueryLog {
    fn eq(&self, other: &Self) -> bool {
        self.sessions == other.sessions && self.vocab == other.vocab
    }
}

impl QueryLog {
    pub fn new(vocab: Vocabulary) -> Self {
        QueryLog {
            vocab,
            ..Default::default()
        }
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn sessions(&self) -> &[Vec<SignedEdge>] {
        &self.sessions
    }

    pub fn session(&self, id: usize) -> &[SignedEdge] {
        &self.sessions[id]
    }

    pub fn is_positive_only(&self) -> bool {
        self.sessions.iter().flatten().all(SignedEdge::is_positive)
    }

    /// Adds a session; duplicates within it collapse. Returns the session id.
    pub fn push_session(&mut self, edges: impl IntoIterator<Item = SignedEdge>) -> usize {
        let mut s: Vec<SignedEdge> = edges.into_iter().collect();
        s.sort_unstable();
        s.dedup();
        let id = self.sessions.len();
        for e in &s {
            self.postings.entry(*e).or_default().push(id as u32);
        }
        self.sessions.push(s);
        id
    }

    pub fn push_query_session(&mut self, q: &QuerySession) -> usize {
        self.push_session(q.edges().iter().copied())
    }

    /// Sorted ids of sessions containing `e`.
    pub fn postings(&self, e: &SignedEdge) -> &[u32] {
        self.postings.get(e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Ids of sessions containing every edge of `edges`; `None` means all sessions.
    pub fn supporting_sessions(&self, edges: &[SignedEdge]) -> Option<Vec<u32>> {
        if edges.is_empty() {
            return None;
        }
        let mut lists: Vec<&[u32]> = edges.iter().map(|e| self.postings(e)).collect();
        lists.sort_by_key(|l| l.len());
        let mut acc: Vec<u32> = lists[0].to_vec();
        for l in &lists[1..] {
            if acc.is_empty() {
                break;
            }
            acc = intersect_sorted(&acc, l);
        }
        Some(acc)
    }

    /// Number of sessions that contain every edge of `edges`; `|W|` for the empty set.
    pub fn count(&self, edges: &[SignedEdge]) -> usize {
        match self.supporting_sessions(edges) {
            None => self.len(),
            Some(ids) => ids.len(),
        }
    }

    /// `(count(subset ∪ {+e}), count(subset))`.
    pub fn supp_ratio(&self, e: EdgeTypeId, subset: &[SignedEdge]) -> (usize, usize) {
        let den = self.count(subset);
        let mut with = subset.to_vec();
        with.push(SignedEdge::pos(e));
        with.sort_unstable();
        with.dedup();
        (self.count(&with), den)
    }

    /// Fraction of sessions supporting `subset` that also contain `+e`.
    pub fn supp(&self, e: EdgeTypeId, subset: &[SignedEdge]) -> Result<f64> {
        let (num, den) = self.supp_ratio(e, subset);
        if den == 0 {
            return Err(Error::NoSupport);
        }
        Ok(num as f64 / den as f64)
    }

    /// Resolves a token (`name` or `~name`) against the vocabulary.
    pub fn signed(&self, token: &str) -> Option<SignedEdge> {
        parse_token_strict(&self.vocab, token)
    }

    /// Parses the log text format. Unknown names extend the vocabulary.
    pub fn parse(text: &str, path: &Path, vocab: Vocabulary) -> Result<Self> {
        let mut log = QueryLog::new(vocab);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut edges = Vec::new();
            for tok in line.split_whitespace() {
                let (name, neg) = match tok.strip_prefix('~') {
                    Some(rest) => (rest, true),
                    None => (tok, false),
                };
                if name.is_empty() || name.starts_with('~') {
                    return Err(Error::parse(path, i + 1, format!("bad token `{tok}`")));
                }
                let et = EdgeTypeId(log.vocab.intern(name));
                edges.push(if neg {
                    SignedEdge::neg(et)
                } else {
                    SignedEdge::pos(et)
                });
            }
            log.push_session(edges);
        }
        Ok(log)
    }

    pub fn load(path: impl AsRef<Path>, vocab: Vocabulary) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, vocab)
    }

    pub fn session_line(&self, edges: &[SignedEdge]) -> String {
        let mut line = String::new();
        for (i, e) in edges.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", e.token(&self.vocab));
        }
        line
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sessions {
            out.push_str(&self.session_line(s));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_text().as_bytes())
            .and_then(|_| f.sync_all())
            .map_err(|e| Error::io(path, e))
    }

    /// Multiset of sessions rendered as sorted token lists, for order-free comparison.
    pub fn session_multiset(&self) -> Vec<Vec<String>> {
        let mut all: Vec<Vec<String>> = self
            .sessions
            .iter()
            .map(|s| {
                let mut toks: Vec<String> = s.iter().map(|e| e.token(&self.vocab)).collect();
                toks.sort();
                toks
            })
            .collect();
        all.sort();
        all
    }
}

pub(crate) fn parse_token_strict(vocab: &Vocabulary, token: &str) -> Option<SignedEdge> {
    match token.strip_prefix('~') {
        Some(name) => vocab.get(name).map(|id| SignedEdge::neg(EdgeTypeId(id))),
        None => vocab.get(token).map(|id| SignedEdge::pos(EdgeTypeId(id))),
    }
}

pub(crate) fn intersect_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
