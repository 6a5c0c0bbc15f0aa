use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use super::{EdgeRanker, RankerKind};
use crate::error::{Error, Result};
use crate::query::{QuerySession, SignedEdge};
use crate::querylog::QueryLog;
use crate::vocab::EdgeTypeId;

/// `antecedent -> consequent`, where the antecedent is every other signed
/// edge of a generating session and the consequent one of its positive edges.
#[derive(Clone, Debug, PartialEq)]
pub struct CarRule {
    /// Sorted.
    pub antecedent: Vec<SignedEdge>,
    pub consequent: EdgeTypeId,
    /// Number of sessions that generated this exact rule.
    pub support: usize,
    /// `count(antecedent ∪ {+consequent}) / count(antecedent)` over the log.
    pub confidence: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CarRuleSet {
    rules: Vec<CarRule>,
    by_consequent: HashMap<EdgeTypeId, Vec<usize>>,
    sessions: usize,
}

pub fn car_train(log: &QueryLog, min_support: usize, min_confidence: f64) -> CarRuleSet {
    let mut agg: BTreeMap<(Vec<SignedEdge>, EdgeTypeId), usize> = BTreeMap::new();
    for s in log.sessions() {
        for (i, c) in s.iter().enumerate().filter(|(_, e)| e.is_positive()) {
            let antecedent: Vec<SignedEdge> = s
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, e)| *e)
                .collect();
            *agg.entry((antecedent, c.etype)).or_insert(0) += 1;
        }
    }
    let mut set = CarRuleSet {
        sessions: log.len(),
        ..Default::default()
    };
    for ((antecedent, consequent), support) in agg {
        if support < min_support {
            continue;
        }
        let (num, den) = log.supp_ratio(consequent, &antecedent);
        let confidence = num as f64 / den as f64;
        if confidence < min_confidence {
            continue;
        }
        set.by_consequent
            .entry(consequent)
            .or_default()
            .push(set.rules.len());
        set.rules.push(CarRule {
            antecedent,
            consequent,
            support,
            confidence,
        });
    }
    set
}

impl CarRuleSet {
    pub fn rules(&self) -> &[CarRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Multiplies every rule support by `k`.
    pub fn scale_supports(&mut self, k: usize) {
        for r in &mut self.rules {
            r.support *= k;
        }
    }

    /// Sum over rules concluding `consequent` of
    /// `overlap / |antecedent| * confidence * support / |W|`.
    pub fn score(&self, consequent: EdgeTypeId, session: &HashSet<SignedEdge>) -> f64 {
        let Some(ids) = self.by_consequent.get(&consequent) else {
            return 0.0;
        };
        let mut total = 0.0;
        for &i in ids {
            let r = &self.rules[i];
            if r.antecedent.is_empty() {
                continue;
            }
            let overlap = r.antecedent.iter().filter(|e| session.contains(e)).count();
            if overlap == 0 {
                continue;
            }
            total += overlap as f64 / r.antecedent.len() as f64 * r.confidence * r.support as f64;
        }
        total / self.sessions.max(1) as f64
    }

    /// `antecedent<TAB>consequent<TAB>support<TAB>confidence`, antecedent space-separated.
    pub fn to_tsv(&self, log: &QueryLog) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                log.session_line(&r.antecedent),
                log.vocab().name(r.consequent.0),
                r.support,
                r.confidence
            );
        }
        out
    }
}

pub struct CarRanker {
    rules: CarRuleSet,
}

impl CarRanker {
    pub fn new(rules: CarRuleSet) -> Self {
        CarRanker { rules }
    }

    pub fn rules(&self) -> &CarRuleSet {
        &self.rules
    }
}

impl EdgeRanker for CarRanker {
    fn kind(&self) -> RankerKind {
        RankerKind::Car
    }

    fn score(
        &self,
        etypes: &[EdgeTypeId],
        session: &QuerySession,
        _stream: u64,
    ) -> Result<Vec<f64>> {
        if etypes.is_empty() {
            return Err(Error::NoCandidates);
        }
        let q: HashSet<SignedEdge> = session.edges().iter().copied().collect();
        Ok(etypes.iter().map(|&e| self.rules.score(e, &q)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::rank_edge_types;
    use crate::rank::testutil::*;

    #[test]
    fn w1_rules_and_duplicate_aggregation() {
        let log = table1();
        let rules = car_train(&log, 1, 0.0);
        let s = |t: &str| log.signed(t).unwrap();
        let mut ante = vec![s("education"), s("~nationality")];
        ante.sort();
        let r = rules
            .rules()
            .iter()
            .find(|r| r.consequent == et(&log, "founder") && r.antecedent == ante)
            .unwrap();
        assert_eq!(r.support, 2);
        assert_eq!(r.confidence, 1.0);
        let mut ante2 = vec![s("founder"), s("~nationality")];
        ante2.sort();
        assert!(rules
            .rules()
            .iter()
            .any(|r| r.consequent == et(&log, "education") && r.antecedent == ante2));
        assert!(rules.rules().iter().all(|r| r.confidence > 0.0
            && r.confidence <= 1.0
            && !r.antecedent.contains(&SignedEdge::pos(r.consequent))));
        // 16 instances, w1 and w8 collapse pairwise
        assert_eq!(rules.len(), 14);
    }

    #[test]
    fn founder_tops_education_session() {
        let log = table1();
        let r = CarRanker::new(car_train(&log, 1, 0.0));
        let q = session(&log, &["education", "~nationality"]);
        let cands = [et(&log, "writer"), et(&log, "founder"), et(&log, "music")];
        let ranked = rank_edge_types(&r, &cands, &q, 0, log.vocab()).unwrap();
        assert_eq!(ranked[0].0, et(&log, "founder"));
        assert!(ranked[0].1 > ranked[1].1);
    }

    #[test]
    fn disjoint_session_scores_zero_alphabetically() {
        let log = table1();
        let r = CarRanker::new(car_train(&log, 1, 0.0));
        let mut v = log.vocab().clone();
        let q: QuerySession = [SignedEdge::pos(EdgeTypeId(v.intern("zzz")))]
            .into_iter()
            .collect();
        let cands = [
            et(&log, "writer"),
            et(&log, "founder"),
            et(&log, "director"),
        ];
        let ranked = rank_edge_types(&r, &cands, &q, 0, &v).unwrap();
        assert!(ranked.iter().all(|(_, s)| *s == 0.0));
        let names: Vec<&str> = ranked.iter().map(|(e, _)| v.name(e.0)).collect();
        assert_eq!(names, vec!["director", "founder", "writer"]);
    }

    #[test]
    fn thresholds_filter_rules() {
        let log = table1();
        assert_eq!(car_train(&log, 2, 0.0).len(), 2);
        assert!(car_train(&log, 1, 1.01).is_empty());
        let tsv = car_train(&log, 2, 0.0).to_tsv(&log);
        assert!(
            tsv.contains("education ~nationality\tfounder\t2\t1\n"),
            "{tsv}"
        );
    }
}
