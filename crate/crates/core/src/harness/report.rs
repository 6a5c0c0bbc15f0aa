use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{CompletionResult, StopReason};
use crate::error::{Error, Result};
use crate::querylog::parse_token_strict;
use crate::rank::RankerKind;
use crate::vocab::Vocabulary;

pub const RESULTS_HEADER: &str = "\
# suggestions counts ranker-issued suggestions only; the initial edge is given.
# runs stopped by the cap are counted at the cap (stop=cap).
ranker\tseed\tinstance\ttarget\tinitial_edge\tsuggestions\tstop\twall_time_s\tsim_num\tsim_den\ttranscript";

/// One record per line under [`RESULTS_HEADER`]. Floats use the shortest
/// round-trip representation, so parsing the text back is lossless.
pub fn results_tsv(results: &[CompletionResult], vocab: &Vocabulary) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in results {
        let transcript: Vec<String> = r.transcript.iter().map(|e| e.token(vocab)).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.ranker,
            r.seed,
            r.instance,
            r.target,
            r.initial_edge,
            r.suggestions_used,
            r.stop.as_str(),
            r.wall_time,
            r.similarity.0,
            r.similarity.1,
            transcript.join(" ")
        );
    }
    out
}

/// Parses the output of [`results_tsv`]. Comment and header lines are skipped.
pub fn parse_results(text: &str, path: &Path, vocab: &Vocabulary) -> Result<Vec<CompletionResult>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.starts_with('#') || line.starts_with("ranker\t") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 11 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 11 fields, found {}", f.len()),
            ));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad integer `{s}`")))
        };
        let stop = match f[6] {
            "completed" => StopReason::Completed,
            "cap" => StopReason::Cap,
            "no-candidates" => StopReason::NoCandidates,
            other => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("bad stop reason `{other}`"),
                ))
            }
        };
        let transcript = f[10]
            .split_whitespace()
            .map(|t| {
                parse_token_strict(vocab, t)
                    .ok_or_else(|| Error::parse(path, lineno, format!("unknown edge type `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(CompletionResult {
            ranker: f[0]
                .parse::<RankerKind>()
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?,
            seed: f[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad seed"))?,
            instance: num(f[2])?,
            target: f[3].to_owned(),
            initial_edge: num(f[4])?,
            suggestions_used: num(f[5])?,
            stop,
            wall_time: f[7]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad wall time"))?,
            similarity: (num(f[8])?, num(f[9])?),
            transcript,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankerSummary {
    pub ranker: RankerKind,
    pub runs: usize,
    pub mean_suggestions: f64,
    pub median_suggestions: f64,
    pub completion_fraction: f64,
    pub capped: usize,
    pub mean_wall_time: f64,
    pub mean_similarity: f64,
}

/// Per-ranker aggregates, in [`RankerKind`] order. Independent of input order.
pub fn summarize(results: &[CompletionResult]) -> Result<Vec<RankerSummary>> {
    if results.is_empty() {
        return Err(Error::EmptyInput("completion results"));
    }
    let mut by: BTreeMap<RankerKind, Vec<&CompletionResult>> = BTreeMap::new();
    for r in results {
        by.entry(r.ranker).or_default().push(r);
    }
    Ok(by
        .into_iter()
        .map(|(ranker, rs)| {
            let n = rs.len() as f64;
            let mut used: Vec<usize> = rs.iter().map(|r| r.suggestions_used).collect();
            used.sort_unstable();
            let mid = used.len() / 2;
            let median = if used.len() % 2 == 1 {
                used[mid] as f64
            } else {
                (used[mid - 1] + used[mid]) as f64 / 2.0
            };
            // integer sums keep the mean independent of result order
            let total: usize = used.iter().sum();
            let mut walls: Vec<f64> = rs.iter().map(|r| r.wall_time).collect();
            walls.sort_by(f64::total_cmp);
            let mut sims: Vec<f64> = rs.iter().map(|r| r.similarity_value()).collect();
            sims.sort_by(f64::total_cmp);
            RankerSummary {
                ranker,
                runs: rs.len(),
                mean_suggestions: total as f64 / n,
                median_suggestions: median,
                completion_fraction: rs.iter().filter(|r| r.completed()).count() as f64 / n,
                capped: rs.iter().filter(|r| r.stop == StopReason::Cap).count(),
                mean_wall_time: walls.iter().sum::<f64>() / n,
                mean_similarity: sims.iter().sum::<f64>() / n,
            }
        })
        .collect())
}

pub fn render_summary(summaries: &[RankerSummary]) -> String {
    let mut out = String::from(
        "# summary (suggestions exclude the initial edge; capped runs counted at the cap)\n",
    );
    let _ = writeln!(
        out,
        "# {:<10} {:>6} {:>10} {:>8} {:>10} {:>7} {:>10} {:>12}",
        "ranker", "runs", "mean", "median", "completed", "capped", "similarity", "wall_ms"
    );
    for s in summaries {
        let _ = writeln!(
            out,
            "# {:<10} {:>6} {:>10.3} {:>8.1} {:>10.3} {:>7} {:>10.4} {:>12.4}",
            s.ranker.as_str(),
            s.runs,
            s.mean_suggestions,
            s.median_suggestions,
            s.completion_fraction,
            s.capped,
            s.mean_similarity,
            s.mean_wall_time * 1e3
        );
    }
    out
}

/// Suggestions of two rankers on the same `(seed, instance)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairedRow {
    pub seed: u64,
    pub instance: usize,
    pub a: usize,
    pub b: usize,
    pub a_capped: bool,
    pub b_capped: bool,
}

/// Pairs results of rankers `a` and `b` on shared `(seed, instance)` keys.
pub fn paired_rows(results: &[CompletionResult], a: RankerKind, b: RankerKind) -> Vec<PairedRow> {
    let pick = |k: RankerKind| -> BTreeMap<(u64, usize), &CompletionResult> {
        results
            .iter()
            .filter(|r| r.ranker == k)
            .map(|r| ((r.seed, r.instance), r))
            .collect()
    };
    let (ra, rb) = (pick(a), pick(b));
    ra.iter()
        .filter_map(|(key, x)| {
            rb.get(key).map(|y| PairedRow {
                seed: key.0,
                instance: key.1,
                a: x.suggestions_used,
                b: y.suggestions_used,
                a_capped: x.stop == StopReason::Cap,
                b_capped: y.stop == StopReason::Cap,
            })
        })
        .collect()
}

pub fn render_paired(rows: &[PairedRow], a: RankerKind, b: RankerKind) -> String {
    let mut out = format!("seed\tinstance\t{a}\t{b}\tdiff\n");
    let flag = |n: usize, capped: bool| {
        if capped {
            format!("{n}*")
        } else {
            n.to_string()
        }
    };
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            r.seed,
            r.instance,
            flag(r.a, r.a_capped),
            flag(r.b, r.b_capped),
            r.a as i64 - r.b as i64
        );
    }
    let wins = rows.iter().filter(|r| r.a < r.b).count();
    let losses = rows.iter().filter(|r| r.a > r.b).count();
    let _ = writeln!(
        out,
        "# {a} fewer on {wins}, more on {losses}, tied on {} of {} paired runs (* = capped)",
        rows.len() - wins - losses,
        rows.len()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::SignedEdge;
    use crate::vocab::EdgeTypeId;

    fn result(
        ranker: RankerKind,
        instance: usize,
        used: usize,
        stop: StopReason,
    ) -> CompletionResult {
        CompletionResult {
            instance,
            target: format!("t{instance}"),
            initial_edge: 0,
            ranker,
            seed: 3,
            suggestions_used: used,
            stop,
            wall_time: 0.1 + instance as f64 / 7.0,
            similarity: (2, 3),
            transcript: vec![
                SignedEdge::pos(EdgeTypeId(0)),
                SignedEdge::neg(EdgeTypeId(1)),
            ],
        }
    }

    #[test]
    fn single_result_mean() {
        let s = summarize(&[result(RankerKind::Rdp, 0, 10, StopReason::Completed)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean_suggestions, 10.0);
        assert_eq!(s[0].median_suggestions, 10.0);
        assert_eq!(s[0].completion_fraction, 1.0);
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn capped_runs_are_flagged_and_counted_at_cap() {
        let rs = vec![
            result(RankerKind::Alpha, 0, 200, StopReason::Cap),
            result(RankerKind::Alpha, 1, 10, StopReason::Completed),
            result(RankerKind::Rdp, 0, 4, StopReason::Completed),
            result(RankerKind::Rdp, 1, 6, StopReason::Completed),
        ];
        let s = summarize(&rs).unwrap();
        let alpha = s.iter().find(|s| s.ranker == RankerKind::Alpha).unwrap();
        assert_eq!(alpha.mean_suggestions, 105.0);
        assert_eq!(alpha.capped, 1);
        assert_eq!(alpha.completion_fraction, 0.5);
        assert!(render_summary(&s).contains("capped runs counted at the cap"));
        let rows = paired_rows(&rs, RankerKind::Rdp, RankerKind::Alpha);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].a, rows[0].b, rows[0].b_capped), (4, 200, true));
        let text = render_paired(&rows, RankerKind::Rdp, RankerKind::Alpha);
        assert!(text.contains("200*"));
        assert!(text.contains("rdp fewer on 2"));
        let mut rev = rs.clone();
        rev.reverse();
        assert_eq!(summarize(&rev).unwrap(), s);
    }

    #[test]
    fn tsv_round_trip() {
        let mut v = Vocabulary::new();
        v.intern("a");
        v.intern("b");
        let rs = vec![
            result(RankerKind::Nb, 0, 3, StopReason::Completed),
            result(RankerKind::Car, 1, 200, StopReason::Cap),
            result(RankerKind::RdpNoneg, 2, 5, StopReason::NoCandidates),
        ];
        let text = results_tsv(&rs, &v);
        assert!(text.starts_with("# suggestions counts ranker-issued"));
        let back = parse_results(&text, Path::new("r.tsv"), &v).unwrap();
        assert_eq!(back, rs);
        assert!(parse_results("rdp\t1\n", Path::new("r"), &v).is_err());
    }
}
