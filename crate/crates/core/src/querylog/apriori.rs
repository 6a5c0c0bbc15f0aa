//! Level-wise frequent itemset mining.

use std::collections::{HashMap, HashSet};

/// All itemsets of size `1..=max_size` contained in at least `min_support`
/// transactions, with their support counts.
///
/// Each transaction is treated as a set. Output itemsets are sorted, and the
/// list is ordered by size, then lexicographically.
pub fn frequent_itemsets<T: Ord + Clone>(
    transactions: &[Vec<T>],
    min_support: usize,
    max_size: usize,
) -> Vec<(Vec<T>, usize)> {
    let min_support = min_support.max(1);
    if max_size == 0 {
        return Vec::new();
    }

    // Dense item codes in sorted order so code order equals item order.
    let mut alphabet: Vec<T> = transactions.iter().flatten().cloned().collect();
    alphabet.sort();
    alphabet.dedup();
    let code = |x: &T| alphabet.binary_search(x).unwrap() as u32;
    let encoded: Vec<Vec<u32>> = transactions
        .iter()
        .map(|t| {
            let mut v: Vec<u32> = t.iter().map(code).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();

    let mut counts = vec![0usize; alphabet.len()];
    for t in &encoded {
        for &i in t {
            counts[i as usize] += 1;
        }
    }
    let mut level: Vec<(Vec<u32>, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c >= min_support)
        .map(|(i, &c)| (vec![i as u32], c))
        .collect();

    let mut out: Vec<(Vec<u32>, usize)> = Vec::new();
    let mut k = 1;
    while !level.is_empty() {
        out.extend(level.iter().cloned());
        if k == max_size {
            break;
        }
        k += 1;
        let candidates = generate_candidates(&level);
        if candidates.is_empty() {
            break;
        }
        let frequent_items: HashSet<u32> =
            level.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        let mut support: HashMap<&[u32], usize> =
            candidates.iter().map(|c| (c.as_slice(), 0)).collect();
        for t in &encoded {
            let t: Vec<u32> = t
                .iter()
                .copied()
                .filter(|i| frequent_items.contains(i))
                .collect();
            if t.len() < k {
                continue;
            }
            if binomial(t.len(), k) <= candidates.len() {
                for_each_combination(&t, k, |combo| {
                    if let Some(c) = support.get_mut(combo) {
                        *c += 1;
                    }
                });
            } else {
                for c in &candidates {
                    if is_subset(c, &t) {
                        *support.get_mut(c.as_slice()).unwrap() += 1;
                    }
                }
            }
        }
        level = candidates
            .iter()
            .filter_map(|c| {
                let s = support[c.as_slice()];
                (s >= min_support).then(|| (c.clone(), s))
            })
            .collect();
    }

    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out.into_iter()
        .map(|(s, c)| {
            (
                s.into_iter()
                    .map(|i| alphabet[i as usize].clone())
                    .collect(),
                c,
            )
        })
        .collect()
}

/// Joins frequent (k-1)-itemsets sharing a (k-2)-prefix and prunes any
/// candidate with an infrequent (k-1)-subset.
fn generate_candidates(level: &[(Vec<u32>, usize)]) -> Vec<Vec<u32>> {
    let mut sets: Vec<&Vec<u32>> = level.iter().map(|(s, _)| s).collect();
    sets.sort();
    let known: HashSet<&[u32]> = sets.iter().map(|s| s.as_slice()).collect();
    let mut out = Vec::new();
    for i in 0..sets.len() {
        let a = sets[i];
        let prefix = &a[..a.len() - 1];
        for b in &sets[i + 1..] {
            if &b[..b.len() - 1] != prefix {
                break;
            }
            let mut c = a.clone();
            c.push(*b.last().unwrap());
            let all_subsets_frequent = (0..c.len() - 2).all(|skip| {
                let sub: Vec<u32> = c
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &x)| x)
                    .collect();
                known.contains(sub.as_slice())
            });
            if all_subsets_frequent {
                out.push(c);
            }
        }
    }
    out
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn for_each_combination(items: &[u32], k: usize, mut f: impl FnMut(&[u32])) {
    let n = items.len();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0u32; k];
    loop {
        for (b, &i) in buf.iter_mut().zip(&idx) {
            *b = items[i];
        }
        f(&buf);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let t = vec![vec!['a', 'b'], vec!['a', 'b'], vec!['a', 'c']];
        let f = frequent_itemsets(&t, 2, 5);
        assert_eq!(f, vec![(vec!['a'], 3), (vec!['b'], 2), (vec!['a', 'b'], 2)]);
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(frequent_itemsets(&[vec!['a']], 1, 5), vec![(vec!['a'], 1)]);
        let t = vec![vec![1, 2], vec![1], vec![2]];
        assert!(frequent_itemsets(&t, 4, 5).is_empty());
        assert!(frequent_itemsets(&t, 1, 0).is_empty());
    }

    #[test]
    fn max_size_caps_levels() {
        let t = vec![vec![1, 2, 3]; 3];
        let f = frequent_itemsets(&t, 1, 2);
        assert_eq!(f.len(), 6);
        assert!(f.iter().all(|(s, _)| s.len() <= 2));
    }

    #[test]
    fn combinations_enumerated() {
        let mut seen = Vec::new();
        for_each_combination(&[1, 2, 3, 4], 2, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![1, 2]);
        assert_eq!(seen[5], vec![3, 4]);
        let mut all = 0;
        for_each_combination(&[7, 8, 9], 3, |_| all += 1);
        assert_eq!(all, 1);
    }
}
