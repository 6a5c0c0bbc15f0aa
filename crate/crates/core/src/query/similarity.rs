//! Edge-preserving match similarity between a built query graph and its target.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::QueryNodeLabel;
use crate::query::QueryGraph;
use crate::vocab::EdgeTypeId;

type EdgeCounts = HashMap<(usize, usize, EdgeTypeId), usize>;

fn edge_counts(g: &QueryGraph) -> EdgeCounts {
    let pos = |id| g.nodes().iter().position(|n| n.id == id).unwrap();
    let mut m = HashMap::new();
    for e in g.edges() {
        *m.entry((pos(e.src), pos(e.dst), e.etype)).or_insert(0) += 1;
    }
    m
}

/// Number of edges of `gu` matched into `gt` under the best injective node mapping.
///
/// Nodes only match nodes carrying an identical label. Parallel edges are
/// matched with multiplicity, so the result never exceeds either edge count.
pub fn matched_edges(gu: &QueryGraph, gt: &QueryGraph) -> usize {
    // Map the smaller vertex set into the larger; the objective is symmetric.
    let (small, large) = if gu.nodes().len() <= gt.nodes().len() {
        (gu, gt)
    } else {
        (gt, gu)
    };
    let sc = edge_counts(small);
    let lc = edge_counts(large);
    let small_labels: Vec<QueryNodeLabel> = small.nodes().iter().map(|n| n.label).collect();
    let large_labels: Vec<QueryNodeLabel> = large.nodes().iter().map(|n| n.label).collect();

    // Edges of `small` grouped by the later endpoint in visiting order, so each
    // group can be scored once both endpoints are decided.
    let mut by_last: Vec<Vec<(usize, usize, EdgeTypeId, usize)>> =
        vec![Vec::new(); small_labels.len()];
    for (&(a, b, et), &c) in &sc {
        by_last[a.max(b)].push((a, b, et, c));
    }
    for group in &mut by_last {
        group.sort_unstable();
    }
    let mut remaining_after: Vec<usize> = vec![0; small_labels.len() + 1];
    for i in (0..small_labels.len()).rev() {
        remaining_after[i] = remaining_after[i + 1] + by_last[i].iter().map(|g| g.3).sum::<usize>();
    }

    struct Search<'a> {
        small_labels: &'a [QueryNodeLabel],
        large_labels: &'a [QueryNodeLabel],
        by_last: &'a [Vec<(usize, usize, EdgeTypeId, usize)>],
        remaining_after: &'a [usize],
        lc: &'a EdgeCounts,
        mapping: Vec<Option<usize>>,
        used: Vec<bool>,
        best: usize,
    }

    impl Search<'_> {
        fn gain(&self, i: usize) -> usize {
            self.by_last[i]
                .iter()
                .map(|&(a, b, et, c)| match (self.mapping[a], self.mapping[b]) {
                    (Some(fa), Some(fb)) => c.min(self.lc.get(&(fa, fb, et)).copied().unwrap_or(0)),
                    _ => 0,
                })
                .sum()
        }

        fn run(&mut self, i: usize, score: usize) {
            if score > self.best {
                self.best = score;
            }
            if i == self.small_labels.len() || score + self.remaining_after[i] <= self.best {
                return;
            }
            for j in 0..self.large_labels.len() {
                if self.used[j] || self.large_labels[j] != self.small_labels[i] {
                    continue;
                }
                self.used[j] = true;
                self.mapping[i] = Some(j);
                let g = self.gain(i);
                self.run(i + 1, score + g);
                self.mapping[i] = None;
                self.used[j] = false;
            }
            self.run(i + 1, score);
        }
    }

    let mut s = Search {
        small_labels: &small_labels,
        large_labels: &large_labels,
        by_last: &by_last,
        remaining_after: &remaining_after,
        lc: &lc,
        mapping: vec![None; small_labels.len()],
        used: vec![false; large_labels.len()],
        best: 0,
    };
    s.run(0, 0);
    s.best
}

/// Fraction of target edges reproduced by `gu`, in `[0, 1]`.
pub fn similarity(gu: &QueryGraph, gt: &QueryGraph) -> Result<f64> {
    let total = gt.edges().len();
    if total == 0 {
        return Err(Error::EdgelessTarget);
    }
    Ok(matched_edges(gu, gt) as f64 / total as f64)
}

/// Mean similarity over `(built, target)` pairs.
pub fn conversion_rate(results: &[(QueryGraph, QueryGraph)]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput("conversion_rate needs at least one pair"));
    }
    let mut sum = 0.0;
    for (gu, gt) in results {
        sum += similarity(gu, gt)?;
    }
    Ok(sum / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{LocalId, QueryEdge, QueryNode};
    use crate::vocab::NodeTypeId;

    fn qg(labels: &[u32], edges: &[(u32, u32, u32)]) -> QueryGraph {
        // bypasses DataGraph validation; similarity is purely structural
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(i, &t)| QueryNode {
                id: LocalId(i as u32),
                label: QueryNodeLabel::Type(NodeTypeId(t)),
            })
            .collect();
        let edges = edges
            .iter()
            .map(|&(s, d, e)| QueryEdge {
                src: LocalId(s),
                dst: LocalId(d),
                etype: EdgeTypeId(e),
            })
            .collect();
        QueryGraph::from_raw(nodes, edges)
    }

    #[test]
    fn identical_is_one() {
        let g = qg(
            &[0, 1, 2, 3],
            &[(0, 1, 0), (0, 2, 1), (2, 3, 2), (3, 0, 3), (1, 1, 4)],
        );
        assert_eq!(similarity(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn half_of_two_edges() {
        let gt = qg(&[0, 1, 2], &[(0, 1, 0), (0, 2, 1)]);
        let gu = qg(&[0, 1], &[(0, 1, 0)]);
        assert_eq!(similarity(&gu, &gt).unwrap(), 0.5);
    }

    #[test]
    fn disjoint_labels_is_zero() {
        let gt = qg(&[0, 1], &[(0, 1, 0)]);
        let gu = qg(&[5, 6], &[(0, 1, 0)]);
        assert_eq!(similarity(&gu, &gt).unwrap(), 0.0);
    }

    #[test]
    fn parallel_edges_count_with_multiplicity() {
        let gt = qg(&[0, 1], &[(0, 1, 0)]);
        let gu = qg(&[0, 1], &[(0, 1, 0), (0, 1, 0)]);
        assert_eq!(similarity(&gu, &gt).unwrap(), 1.0);
        assert_eq!(similarity(&gt, &gu).unwrap(), 0.5);
    }

    #[test]
    fn larger_built_graph_maps_target_into_it() {
        let gt = qg(&[0, 1], &[(0, 1, 0)]);
        let gu = qg(&[2, 0, 1], &[(1, 2, 0), (0, 1, 3)]);
        assert_eq!(similarity(&gu, &gt).unwrap(), 1.0);
    }

    #[test]
    fn edgeless_target_errors() {
        let gt = qg(&[0], &[]);
        assert!(matches!(similarity(&gt, &gt), Err(Error::EdgelessTarget)));
    }

    #[test]
    fn conversion_rate_cases() {
        let gt = qg(&[0, 1], &[(0, 1, 0)]);
        let miss = qg(&[3], &[]);
        assert!(conversion_rate(&[]).is_err());
        let mut pairs = vec![(gt.clone(), gt.clone()); 74];
        pairs.extend(std::iter::repeat_n((miss, gt.clone()), 31));
        let c = conversion_rate(&pairs).unwrap();
        assert!((c - 74.0 / 105.0).abs() < 1e-12);
        assert!((c - 0.7047).abs() < 1e-4);

        let gt2 = qg(&[0, 1, 2], &[(0, 1, 0), (0, 2, 1)]);
        let half = qg(&[0, 1], &[(0, 1, 0)]);
        assert_eq!(conversion_rate(&[(half, gt2)]).unwrap(), 0.5);
    }
}
