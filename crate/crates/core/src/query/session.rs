use std::fmt;

use serde::{Deserialize, Serialize};

use crate::vocab::{EdgeTypeId, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// An edge type recorded as accepted (positive) or ignored (negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedEdge {
    pub etype: EdgeTypeId,
    pub sign: Sign,
}

impl SignedEdge {
    pub fn pos(etype: EdgeTypeId) -> Self {
        SignedEdge {
            etype,
            sign: Sign::Positive,
        }
    }

    pub fn neg(etype: EdgeTypeId) -> Self {
        SignedEdge {
            etype,
            sign: Sign::Negative,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    /// `name` or `~name`.
    pub fn token(&self, vocab: &Vocabulary) -> String {
        let name = vocab.name(self.etype.0);
        match self.sign {
            Sign::Positive => name.to_owned(),
            Sign::Negative => format!("~{name}"),
        }
    }
}

impl fmt::Display for SignedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "+{}", self.etype),
            Sign::Negative => write!(f, "-{}", self.etype),
        }
    }
}

/// Ordered, duplicate-free record of suggestion outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySession {
    edges: Vec<SignedEdge>,
}

impl QuerySession {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `e`; returns `false` (and leaves the session unchanged) if it is already present.
    pub fn push(&mut self, e: SignedEdge) -> bool {
        if self.edges.contains(&e) {
            return false;
        }
        self.edges.push(e);
        true
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &SignedEdge) -> bool {
        self.edges.contains(e)
    }

    /// True if `etype` appears with either sign.
    pub fn mentions(&self, etype: EdgeTypeId) -> bool {
        self.edges.iter().any(|e| e.etype == etype)
    }

    pub fn positives(&self) -> impl Iterator<Item = &SignedEdge> {
        self.edges.iter().filter(|e| e.is_positive())
    }

    pub fn negatives(&self) -> impl Iterator<Item = &SignedEdge> {
        self.edges.iter().filter(|e| !e.is_positive())
    }
}

impl FromIterator<SignedEdge> for QuerySession {
    fn from_iter<I: IntoIterator<Item = SignedEdge>>(iter: I) -> Self {
        let mut s = QuerySession::new();
        for e in iter {
            s.push(e);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicate_push_is_noop() {
        let mut s = QuerySession::new();
        assert!(s.push(SignedEdge::pos(EdgeTypeId(1))));
        assert!(s.push(SignedEdge::neg(EdgeTypeId(1))));
        assert!(!s.push(SignedEdge::pos(EdgeTypeId(1))));
        assert_eq!(s.len(), 2);
        assert!(s.mentions(EdgeTypeId(1)));
        assert!(!s.mentions(EdgeTypeId(2)));
    }

    proptest! {
        #[test]
        fn session_never_holds_duplicates(ops in prop::collection::vec((0u32..6, any::<bool>()), 0..40)) {
            let mut s = QuerySession::new();
            let mut first_seen = Vec::new();
            for (e, pos) in ops {
                let se = if pos { SignedEdge::pos(EdgeTypeId(e)) } else { SignedEdge::neg(EdgeTypeId(e)) };
                if !first_seen.contains(&se) {
                    first_seen.push(se);
                }
                s.push(se);
            }
            prop_assert_eq!(s.edges(), &first_seen[..]);
        }
    }
}
