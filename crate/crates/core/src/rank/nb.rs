use std::collections::HashMap;
use std::fmt::Write as _;

use super::{EdgeRanker, RankerKind};
use crate::error::{Error, Result};
use crate::query::{QuerySession, SignedEdge};
use crate::querylog::QueryLog;
use crate::vocab::EdgeTypeId;

/// Additive smoothing constant.
const ALPHA: f64 = 1.0;

/// A session with `t` positive edges yields `t` instances: each positive
/// edge in turn is the class, every other signed edge is an attribute.
pub fn training_instances(log: &QueryLog) -> Vec<(Vec<SignedEdge>, EdgeTypeId)> {
    let mut out = Vec::new();
    for s in log.sessions() {
        for (i, class) in s.iter().enumerate().filter(|(_, e)| e.is_positive()) {
            let attrs = s
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, e)| *e)
                .collect();
            out.push((attrs, class.etype));
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
struct ClassStats {
    instances: usize,
    attr_total: usize,
    attrs: HashMap<SignedEdge, usize>,
}

/// Multinomial naive Bayes over signed-edge attributes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NbModel {
    classes: HashMap<EdgeTypeId, ClassStats>,
    instances: usize,
    attr_vocab: usize,
}

pub fn nb_train(log: &QueryLog) -> Result<NbModel> {
    let mut m = NbModel::default();
    let mut seen_attrs = std::collections::HashSet::new();
    for s in log.sessions() {
        for (i, class) in s.iter().enumerate().filter(|(_, e)| e.is_positive()) {
            let stats = m.classes.entry(class.etype).or_default();
            stats.instances += 1;
            m.instances += 1;
            for (j, a) in s.iter().enumerate() {
                if j != i {
                    *stats.attrs.entry(*a).or_insert(0) += 1;
                    stats.attr_total += 1;
                    seen_attrs.insert(*a);
                }
            }
        }
    }
    if m.instances == 0 {
        return Err(Error::EmptyLog);
    }
    m.attr_vocab = seen_attrs.len();
    Ok(m)
}

impl NbModel {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn instance_count(&self) -> usize {
        self.instances
    }

    /// Smoothed log-posterior (up to a constant) of `class` given `evidence`.
    pub fn log_posterior(&self, class: EdgeTypeId, evidence: &[SignedEdge]) -> f64 {
        let k = self.classes.len() as f64 + 1.0; // one slot for unseen classes
        let v = self.attr_vocab as f64 + 1.0;
        let empty = ClassStats::default();
        let stats = self.classes.get(&class).unwrap_or(&empty);
        let prior = (stats.instances as f64 + ALPHA) / (self.instances as f64 + ALPHA * k);
        let denom = stats.attr_total as f64 + ALPHA * v;
        evidence.iter().fold(prior.ln(), |acc, a| {
            let c = stats.attrs.get(a).copied().unwrap_or(0) as f64;
            acc + ((c + ALPHA) / denom).ln()
        })
    }

    /// Tab-separated dump: `class<TAB>instances`, then `class<TAB>attribute<TAB>count`.
    pub fn to_tsv(&self, log: &QueryLog) -> String {
        let mut classes: Vec<_> = self.classes.iter().collect();
        classes.sort_by_key(|(c, _)| log.vocab().name(c.0));
        let mut out = String::from("#classes\n");
        for (c, s) in &classes {
            let _ = writeln!(out, "{}\t{}", log.vocab().name(c.0), s.instances);
        }
        out.push_str("#attributes\n");
        for (c, s) in &classes {
            let mut attrs: Vec<_> = s
                .attrs
                .iter()
                .map(|(a, n)| (a.token(log.vocab()), *n))
                .collect();
            attrs.sort();
            for (a, n) in attrs {
                let _ = writeln!(out, "{}\t{a}\t{n}", log.vocab().name(c.0));
            }
        }
        out
    }
}

pub struct NbRanker {
    model: NbModel,
}

impl NbRanker {
    pub fn new(model: NbModel) -> Self {
        NbRanker { model }
    }

    pub fn model(&self) -> &NbModel {
        &self.model
    }
}

impl EdgeRanker for NbRanker {
    fn kind(&self) -> RankerKind {
        RankerKind::Nb
    }

    /// Posterior probabilities normalized over the candidate set.
    fn score(
        &self,
        etypes: &[EdgeTypeId],
        session: &QuerySession,
        _stream: u64,
    ) -> Result<Vec<f64>> {
        if etypes.is_empty() {
            return Err(Error::NoCandidates);
        }
        let lp: Vec<f64> = etypes
            .iter()
            .map(|&c| self.model.log_posterior(c, session.edges()))
            .collect();
        let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = lp.iter().map(|x| (x - max).exp()).collect();
        let z: f64 = exp.iter().sum();
        Ok(exp.into_iter().map(|x| x / z).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::rank_edge_types;
    use crate::rank::testutil::*;

    #[test]
    fn w1_conversion() {
        let log = table1();
        let inst = training_instances(&log);
        let s = |t: &str| log.signed(t).unwrap();
        let mut w1: Vec<(Vec<SignedEdge>, EdgeTypeId)> = inst[..2].to_vec();
        for (a, _) in &mut w1 {
            a.sort();
        }
        let mut want = vec![
            (vec![s("founder"), s("~nationality")], et(&log, "education")),
            (vec![s("education"), s("~nationality")], et(&log, "founder")),
        ];
        for (a, _) in &mut want {
            a.sort();
        }
        w1.sort_by_key(|(_, c)| *c);
        want.sort_by_key(|(_, c)| *c);
        assert_eq!(w1, want);
        // 2+2+2+2+2+2+2+2 positives across Table 1
        assert_eq!(inst.len(), 16);
        let m = nb_train(&log).unwrap();
        assert_eq!(m.instance_count(), 16);
    }

    #[test]
    fn empty_session_ranks_by_prior() {
        let log = table1();
        let r = NbRanker::new(nb_train(&log).unwrap());
        let cands = [et(&log, "movie"), et(&log, "director"), et(&log, "founder")];
        let ranked = rank_edge_types(&r, &cands, &QuerySession::new(), 0, log.vocab()).unwrap();
        // director: 3 instances, founder: 3, movie: 1
        assert_eq!(ranked[0].0, et(&log, "director"));
        assert_eq!(ranked[1].0, et(&log, "founder"));
        assert_eq!(ranked[2].0, et(&log, "movie"));
        assert_eq!(ranked[0].1, ranked[1].1);
    }

    #[test]
    fn unseen_class_ranks_below_seen_with_evidence() {
        let log = table1();
        let mut v = log.vocab().clone();
        let unseen = EdgeTypeId(v.intern("aaa_unseen"));
        let r = NbRanker::new(nb_train(&log).unwrap());
        let q = session(&log, &["education", "~nationality"]);
        let cands = [unseen, et(&log, "founder"), et(&log, "writer")];
        let ranked = rank_edge_types(&r, &cands, &q, 0, &v).unwrap();
        assert_eq!(ranked[0].0, et(&log, "founder"));
        assert_eq!(ranked.last().unwrap().0, unseen);
        assert!(ranked.iter().all(|(_, s)| *s >= 0.0));
        let empty = crate::querylog::QueryLog::parse(
            "~a ~b\n",
            std::path::Path::new("x"),
            Default::default(),
        )
        .unwrap();
        assert!(matches!(nb_train(&empty), Err(Error::EmptyLog)));
    }

    #[test]
    fn tsv_dump_lists_classes() {
        let log = table1();
        let m = nb_train(&log).unwrap();
        let tsv = m.to_tsv(&log);
        assert!(tsv.contains("founder\t3\n"));
        assert!(tsv.contains("founder\t~nationality\t2\n"));
    }
}
