//! Set-based retrieval evaluation: precision, recall and the parametric
//! F-measure, per-run reports and fixed-G comparison of two systems.
//!
//! Everything numeric is generic over [`Scalar`]; the crate root exposes
//! `f64` aliases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_count(n: i64) -> Result<()> {
    if n < 0 {
        return Err(Error::NegativeCount(n));
    }
    Ok(())
}

/// `g_r / N`; zero when nothing was retrieved.
pub fn precision<T: Scalar>(g_r: i64, n: i64) -> Result<T> {
    check_count(g_r)?;
    check_count(n)?;
    if g_r > n {
        return Err(Error::GExceedsN { g_r, n });
    }
    if n == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_count(g_r as u64) / T::from_count(n as u64))
}

/// `g_r / G`.
pub fn recall<T: Scalar>(g_r: i64, g: i64) -> Result<T> {
    check_count(g_r)?;
    if g < 1 {
        return Err(Error::InvalidG(g));
    }
    if g_r > g {
        return Err(Error::InvariantViolation(format!(
            "relevant retrieved {g_r} exceeds total relevant {g}"
        )));
    }
    Ok(T::from_count(g_r as u64) / T::from_count(g as u64))
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if !(beta >= T::zero() && beta.is_finite()) {
        return Err(Error::OutOfRange {
            what: "beta",
            value: beta.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// `(beta^2 + 1) P R / (beta^2 P + R)`, zero where the denominator vanishes.
pub fn f_measure<T: Scalar>(p: T, r: T, beta: T) -> Result<T> {
    for (what, v) in [("precision", p), ("recall", r)] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::OutOfRange {
                what,
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    check_beta(beta)?;
    let b2 = beta * beta;
    let den = b2 * p + r;
    if den == T::zero() {
        return Ok(T::zero());
    }
    Ok((b2 + T::one()) * p * r / den)
}

/// F for fixed `g_r` and `N` across a sweep of G.
pub fn f_curve<T: Scalar>(g_r: i64, n: i64, g_values: &[u64], beta: T) -> Result<Vec<(u64, T)>> {
    let p = precision::<T>(g_r, n)?;
    g_values
        .iter()
        .map(|&g| {
            let r = recall::<T>(g_r, g as i64)?;
            Ok((g, f_measure(p, r, beta)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryJudgment {
    pub relevant: BTreeSet<String>,
    /// Total number of relevant documents that exist (G).
    pub total_relevant: u64,
}

/// Relevance judgments per query.
///
/// File format, whitespace separated, `#` starts a comment line:
///
/// ```text
/// G <query_id> <count>      total relevant documents for the query
/// <query_id> <doc_id>       one judged-relevant document
/// ```
///
/// Four-column qrels lines (`qid iter doc rel`) are accepted too; `rel > 0`
/// marks the document relevant. Without a `G` line, G is the number of
/// listed relevant documents.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RelevanceJudgments {
    pub queries: BTreeMap<String, QueryJudgment>,
}

impl RelevanceJudgments {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut relevant: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["G", qid, count] => {
                    let g: i64 = count
                        .parse()
                        .map_err(|_| Error::parse(source_name, i + 1, format!("bad G count {count:?}")))?;
                    if g < 1 {
                        return Err(Error::InvalidG(g));
                    }
                    if totals.insert(qid.to_string(), g as u64).is_some() {
                        return Err(Error::parse(source_name, i + 1, format!("second G line for {qid}")));
                    }
                }
                [qid, doc] => {
                    relevant.entry(qid.to_string()).or_default().insert(doc.to_string());
                }
                [qid, _iter, doc, rel] => {
                    let rel: i64 = rel
                        .parse()
                        .map_err(|_| Error::parse(source_name, i + 1, format!("bad relevance {rel:?}")))?;
                    let docs = relevant.entry(qid.to_string()).or_default();
                    if rel > 0 {
                        docs.insert(doc.to_string());
                    }
                }
                _ => return Err(Error::parse(source_name, i + 1, "expected `qid doc` or `G qid count`")),
            }
        }
        let mut queries = BTreeMap::new();
        let ids: BTreeSet<String> = relevant.keys().chain(totals.keys()).cloned().collect();
        for qid in ids {
            let rel = relevant.remove(&qid).unwrap_or_default();
            let g = match totals.get(&qid) {
                Some(&g) => g,
                None if rel.is_empty() => return Err(Error::InvalidG(0)),
                None => rel.len() as u64,
            };
            queries.insert(
                qid,
                QueryJudgment {
                    relevant: rel,
                    total_relevant: g,
                },
            );
        }
        Ok(Self { queries })
    }

    pub fn get(&self, query_id: &str) -> Result<&QueryJudgment> {
        self.queries
            .get(query_id)
            .ok_or_else(|| Error::MissingJudgment(query_id.to_string()))
    }
}

/// Ranked retrieval output of one system.
///
/// File format: `<query_id> <doc_id> <rank>` per line. Six-column TREC run
/// lines (`qid Q0 doc rank score tag`) are accepted too.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Run {
    pub system: String,
    pub queries: BTreeMap<String, Vec<String>>,
}

impl Run {
    pub fn parse(text: &str, system: &str, source_name: &str) -> Result<Self> {
        let mut ranked: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (qid, doc, rank) = match fields.as_slice() {
                [q, d, r] => (*q, *d, *r),
                [q, _, d, r, _, _] => (*q, *d, *r),
                _ => return Err(Error::parse(source_name, i + 1, "expected `qid doc rank`")),
            };
            let rank: u64 = rank
                .parse()
                .map_err(|_| Error::parse(source_name, i + 1, format!("bad rank {rank:?}")))?;
            ranked.entry(qid.to_string()).or_default().push((rank, doc.to_string()));
        }
        let mut queries = BTreeMap::new();
        for (qid, mut docs) in ranked {
            docs.sort();
            let mut seen = BTreeSet::new();
            for (_, d) in &docs {
                if !seen.insert(d.as_str()) {
                    return Err(Error::parse(
                        source_name,
                        0,
                        format!("document {d} retrieved twice for {qid}"),
                    ));
                }
            }
            queries.insert(qid, docs.into_iter().map(|(_, d)| d).collect());
        }
        Ok(Self {
            system: system.to_string(),
            queries,
        })
    }

    pub fn query_ids(&self) -> BTreeSet<&str> {
        self.queries.keys().map(String::as_str).collect()
    }

    pub fn result(&self, query_id: &str, judgments: &RelevanceJudgments) -> Result<RunResult> {
        let retrieved = self.queries.get(query_id).cloned().unwrap_or_default();
        let relevant = &judgments.get(query_id)?.relevant;
        let g_r = retrieved.iter().filter(|d| relevant.contains(*d)).count() as u64;
        Ok(RunResult {
            query_id: query_id.to_string(),
            system: self.system.clone(),
            n: retrieved.len() as u64,
            g_r,
            retrieved,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunResult {
    pub query_id: String,
    pub system: String,
    pub retrieved: Vec<String>,
    pub n: u64,
    pub g_r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryEval<T> {
    pub query_id: String,
    pub g_r: u64,
    pub n: u64,
    pub g: u64,
    pub precision: T,
    pub recall: T,
    pub f: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport<T> {
    pub system: String,
    pub beta: T,
    pub queries: Vec<QueryEval<T>>,
    pub mean_precision: T,
    pub mean_recall: T,
    pub mean_f: T,
}

fn eval_counts<T: Scalar>(query_id: &str, g_r: u64, n: u64, g: u64, beta: T) -> Result<QueryEval<T>> {
    if g_r > g {
        return Err(Error::InvariantViolation(format!(
            "query {query_id}: {g_r} relevant retrieved but G = {g}"
        )));
    }
    let p = precision::<T>(g_r as i64, n as i64)?;
    let r = recall::<T>(g_r as i64, g as i64)?;
    Ok(QueryEval {
        query_id: query_id.to_string(),
        g_r,
        n,
        g,
        precision: p,
        recall: r,
        f: f_measure(p, r, beta)?,
    })
}

fn mean<T: Scalar>(values: impl ExactSizeIterator<Item = T>) -> T {
    let n = values.len();
    if n == 0 {
        return T::zero();
    }
    values.sum::<T>() / T::from_count(n as u64)
}

impl<T: Scalar> EvalReport<T> {
    fn from_queries(system: &str, beta: T, queries: Vec<QueryEval<T>>) -> Self {
        Self {
            system: system.to_string(),
            beta,
            mean_precision: mean(queries.iter().map(|q| q.precision)),
            mean_recall: mean(queries.iter().map(|q| q.recall)),
            mean_f: mean(queries.iter().map(|q| q.f)),
            queries,
        }
    }
}

/// Per-query P, R, F for every query in the run, plus their means.
pub fn evaluate_run<T: Scalar>(run: &Run, judgments: &RelevanceJudgments, beta: T) -> Result<EvalReport<T>> {
    check_beta(beta)?;
    let queries = run
        .queries
        .keys()
        .map(|qid| {
            let res = run.result(qid, judgments)?;
            let g = judgments.get(qid)?.total_relevant;
            eval_counts(qid, res.g_r, res.n, g, beta)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_queries(&run.system, beta, queries))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow<T> {
    pub g: u64,
    pub f_a: T,
    pub f_b: T,
}

/// Two systems' F-measure under shared G values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemComparison<T> {
    pub system_a: String,
    pub system_b: String,
    pub beta: T,
    pub rows: Vec<ComparisonRow<T>>,
}

impl<T: Scalar> SystemComparison<T> {
    /// Tab separated `G`, `F` of system A, `F` of system B, with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("G\tF-measure {}\tF-measure {}\n", self.system_a, self.system_b);
        for row in &self.rows {
            let _ = writeln!(out, "{}\t{:.9}\t{:.9}", row.g, row.f_a, row.f_b);
        }
        out
    }

    /// Two-column `G`, `F` data for one side, for external plotting.
    pub fn curve_tsv(&self, system_b: bool) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let f = if system_b { row.f_b } else { row.f_a };
            let _ = writeln!(out, "{}\t{:.9}", row.g, f);
        }
        out
    }
}

/// Compares two runs over the same query set.
///
/// With `g_values` non-empty, each row re-evaluates every query with its G
/// set to that value and reports the mean F of each system. An empty
/// `g_values` yields one row per distinct judged G, averaging the queries
/// judged with that G.
pub fn compare_systems<T: Scalar>(
    run_a: &Run,
    run_b: &Run,
    judgments: &RelevanceJudgments,
    beta: T,
    g_values: &[u64],
) -> Result<SystemComparison<T>> {
    check_beta(beta)?;
    let (qa, qb) = (run_a.query_ids(), run_b.query_ids());
    if qa != qb {
        let diff: Vec<&str> = qa.symmetric_difference(&qb).copied().collect();
        return Err(Error::QuerySetMismatch(diff.join(", ")));
    }
    let mut results = Vec::with_capacity(qa.len());
    for qid in &qa {
        let judged = judgments.get(qid)?;
        results.push((judged, run_a.result(qid, judgments)?, run_b.result(qid, judgments)?));
    }

    let mut rows = Vec::new();
    let mut push_row = |g: u64, members: Vec<&(&QueryJudgment, RunResult, RunResult)>| -> Result<()> {
        let mut fa = Vec::with_capacity(members.len());
        let mut fb = Vec::with_capacity(members.len());
        for (_, a, b) in members {
            fa.push(eval_counts(&a.query_id, a.g_r, a.n, g, beta)?.f);
            fb.push(eval_counts(&b.query_id, b.g_r, b.n, g, beta)?.f);
        }
        rows.push(ComparisonRow {
            g,
            f_a: mean(fa.into_iter()),
            f_b: mean(fb.into_iter()),
        });
        Ok(())
    };

    if g_values.is_empty() {
        let distinct: BTreeSet<u64> = results.iter().map(|(j, _, _)| j.total_relevant).collect();
        for g in distinct {
            push_row(g, results.iter().filter(|(j, _, _)| j.total_relevant == g).collect())?;
        }
    } else {
        for &g in g_values {
            if g == 0 || results.iter().any(|(j, _, _)| (j.relevant.len() as u64) > g) {
                return Err(Error::GMismatch(g));
            }
            push_row(g, results.iter().collect())?;
        }
    }
    Ok(SystemComparison {
        system_a: run_a.system.clone(),
        system_b: run_b.system.clone(),
        beta,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn precision_examples() {
        assert!(close(precision::<f64>(400, 604).unwrap(), 0.662252, 1e-6));
        assert_eq!(precision::<f64>(5, 5).unwrap(), 1.0);
        assert_eq!(precision::<f64>(0, 10).unwrap(), 0.0);
        assert_eq!(precision::<f64>(0, 0).unwrap(), 0.0);
        assert_eq!(precision::<f64>(3, 2).unwrap_err().code(), "GExceedsN");
        assert_eq!(precision::<f64>(-1, 2).unwrap_err().code(), "NegativeCount");
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall::<f64>(400, 500).unwrap(), 0.8);
        assert_eq!(recall::<f64>(7, 7).unwrap(), 1.0);
        assert_eq!(recall::<f64>(0, 7).unwrap(), 0.0);
        assert_eq!(recall::<f64>(1, 0).unwrap_err().code(), "InvalidG");
    }

    #[test]
    fn f_measure_examples() {
        let p = precision::<f64>(400, 604).unwrap();
        assert!(close(f_measure(p, 0.8, 1.0).unwrap(), 0.724637681, 1e-9));
        for beta in [0.0, 0.5, 1.0, 2.0] {
            assert!(close(f_measure(0.37, 0.37, beta).unwrap(), 0.37, 1e-15));
        }
        assert_eq!(f_measure(1.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(f_measure(0.0, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(f_measure(1.5, 0.2, 1.0).unwrap_err().code(), "OutOfRange");
        assert_eq!(f_measure(0.5, 0.2, -1.0).unwrap_err().code(), "OutOfRange");
        assert_eq!(f_measure::<f32>(0.5, 0.5, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn f_curve_examples() {
        let curve = f_curve::<f64>(400, 604, &[500, 1000, 10_000, 1_000_000], 1.0).unwrap();
        assert!(close(curve[0].1, 0.724638, 1e-6));
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(curve.last().unwrap().1 < 1e-3);
        assert!(f_curve::<f64>(400, 604, &[], 1.0).unwrap().is_empty());
        assert_eq!(
            f_curve::<f64>(400, 604, &[100], 1.0).unwrap_err().code(),
            "InvariantViolation"
        );
    }

    fn synthetic_run(system: &str, qid: &str, relevant_hits: usize, n: usize) -> Run {
        let mut docs: Vec<String> = (0..relevant_hits).map(|i| format!("r{i}")).collect();
        docs.extend((0..n - relevant_hits).map(|i| format!("x{i}")));
        Run {
            system: system.into(),
            queries: BTreeMap::from([(qid.to_string(), docs)]),
        }
    }

    fn judgments_for(qid: &str, listed: usize, g: u64) -> RelevanceJudgments {
        let text: String = (0..listed).map(|i| format!("{qid} r{i}\n")).collect::<String>() + &format!("G {qid} {g}\n");
        RelevanceJudgments::parse(&text, "j").unwrap()
    }

    #[test]
    fn evaluate_run_examples() {
        let run = synthetic_run("a", "q1", 500, 880);
        let rep = evaluate_run::<f64>(&run, &judgments_for("q1", 500, 1000), 1.0).unwrap();
        assert!(close(rep.queries[0].f, 0.531914894, 1e-9));
        assert_eq!(
            (rep.queries[0].g_r, rep.queries[0].n, rep.queries[0].g),
            (500, 880, 1000)
        );

        let empty = Run {
            system: "e".into(),
            queries: BTreeMap::from([("q1".to_string(), vec![])]),
        };
        let rep = evaluate_run::<f64>(&empty, &judgments_for("q1", 5, 10), 1.0).unwrap();
        assert_eq!((rep.mean_precision, rep.mean_recall, rep.mean_f), (0.0, 0.0, 0.0));

        let over = synthetic_run("a", "q1", 20, 30);
        let err = evaluate_run::<f64>(&over, &judgments_for("q1", 20, 10), 1.0).unwrap_err();
        assert_eq!(err.code(), "InvariantViolation");

        let err = evaluate_run::<f64>(&synthetic_run("a", "q9", 1, 1), &judgments_for("q1", 1, 1), 1.0).unwrap_err();
        assert_eq!(err.code(), "MissingJudgment");
    }

    const TABLE_A: [f64; 3] = [0.724637681, 0.531914894, 0.347222222];
    const TABLE_B: [f64; 3] = [0.595238095, 0.426136364, 0.271739130];

    #[test]
    fn fixed_counts_reproduce_the_comparison_table() {
        let a = synthetic_run("ours", "q1", 500, 880);
        let mut b = synthetic_run("baseline", "q1", 375, 760);
        b.queries.get_mut("q1").unwrap().reverse();
        let j = judgments_for("q1", 500, 500);
        let cmp = compare_systems::<f64>(&a, &b, &j, 1.0, &[500, 1000, 2000]).unwrap();
        for (i, row) in cmp.rows.iter().enumerate() {
            assert!(close(row.f_a, TABLE_A[i], 1e-9), "row {i}: {}", row.f_a);
            assert!(close(row.f_b, TABLE_B[i], 1e-9), "row {i}: {}", row.f_b);
        }
        let tsv = cmp.to_tsv();
        assert!(tsv.contains("500\t0.724637681\t0.595238095"));
        assert!(tsv.contains("2000\t0.347222222\t0.271739130"));
        assert_eq!(cmp.curve_tsv(true).lines().count(), 3);
    }

    #[test]
    fn per_query_g_rows_from_judged_values() {
        // one query per G, system A counts varying per row
        let mut a = Run {
            system: "a".into(),
            ..Default::default()
        };
        let mut text = String::new();
        for (qid, g_r, n, g) in [
            ("q500", 400, 604, 500u64),
            ("q1000", 500, 880, 1000),
            ("q2000", 600, 1456, 2000),
        ] {
            let docs: Vec<String> = (0..g_r)
                .map(|i| format!("{qid}r{i}"))
                .chain((0..n - g_r).map(|i| format!("{qid}x{i}")))
                .collect();
            for i in 0..g_r {
                text.push_str(&format!("{qid} {qid}r{i}\n"));
            }
            text.push_str(&format!("G {qid} {g}\n"));
            a.queries.insert(qid.to_string(), docs);
        }
        let j = RelevanceJudgments::parse(&text, "j").unwrap();
        let cmp = compare_systems::<f64>(&a, &a.clone(), &j, 1.0, &[]).unwrap();
        let got: Vec<_> = cmp.rows.iter().map(|r| (r.g, r.f_a)).collect();
        assert_eq!(got.iter().map(|r| r.0).collect::<Vec<_>>(), vec![500, 1000, 2000]);
        for (row, want) in got.iter().zip(TABLE_A) {
            assert!(close(row.1, want, 1e-9));
        }
        assert!(cmp.rows.iter().all(|r| r.f_a == r.f_b));
    }

    #[test]
    fn comparison_errors() {
        let a = synthetic_run("a", "q1", 5, 10);
        let b = synthetic_run("b", "q2", 5, 10);
        let j = judgments_for("q1", 5, 10);
        assert_eq!(
            compare_systems::<f64>(&a, &b, &j, 1.0, &[]).unwrap_err().code(),
            "QuerySetMismatch"
        );
        assert_eq!(
            compare_systems::<f64>(&a, &a, &j, 1.0, &[3]).unwrap_err().code(),
            "GMismatch"
        );
        assert_eq!(
            compare_systems::<f64>(&a, &a, &j, -2.0, &[]).unwrap_err().code(),
            "OutOfRange"
        );
    }

    #[test]
    fn file_parsing() {
        let j = RelevanceJudgments::parse("# c\nq1 d1\nq1 0 d2 1\nq1 0 d3 0\nG q1 4\nq2 d9\n", "j").unwrap();
        assert_eq!(j.get("q1").unwrap().relevant.len(), 2);
        assert_eq!(j.get("q1").unwrap().total_relevant, 4);
        assert_eq!(j.get("q2").unwrap().total_relevant, 1);
        assert_eq!(
            RelevanceJudgments::parse("G q1 0\n", "j").unwrap_err().code(),
            "InvalidG"
        );
        assert_eq!(
            RelevanceJudgments::parse("a b c d e\n", "j").unwrap_err().code(),
            "ParseError"
        );

        let r = Run::parse("q1 d2 2\nq1 d1 1\nq2 Q0 d5 1 0.3 tag\n", "sys", "r").unwrap();
        assert_eq!(r.queries["q1"], vec!["d1", "d2"]);
        assert_eq!(r.queries["q2"], vec!["d5"]);
        assert_eq!(
            Run::parse("q1 d1 1\nq1 d1 2\n", "s", "r").unwrap_err().code(),
            "ParseError"
        );
        assert_eq!(Run::parse("q1 d1 x\n", "s", "r").unwrap_err().code(), "ParseError");
    }

    proptest! {
        #[test]
        fn closed_form_at_beta_one(n in 1i64..1_000_000, g in 1i64..1_000_000, frac in 0.0f64..=1.0) {
            let g_r = ((n.min(g) as f64) * frac).floor() as i64;
            let f = f_measure(precision::<f64>(g_r, n).unwrap(), recall::<f64>(g_r, g).unwrap(), 1.0).unwrap();
            let closed = 2.0 * g_r as f64 / (n + g) as f64;
            prop_assert!((f - closed).abs() <= 1e-12);
        }

        #[test]
        fn harmonic_bounds_and_monotonicity(p in 0.0f64..=1.0, r in 0.0f64..=1.0, dp in 0.0f64..=1.0, beta in 0.0f64..4.0) {
            let f = f_measure(p, r, 1.0).unwrap();
            prop_assert!(f <= p.max(r) + 1e-15);
            prop_assert!(f <= (p + r) / 2.0 + 1e-15);
            let fb = f_measure(p, r, beta).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&fb));
            let p2 = (p + dp).min(1.0);
            let r2 = (r + dp).min(1.0);
            prop_assert!(f_measure(p2, r, beta).unwrap() >= fb - 1e-12);
            prop_assert!(f_measure(p, r2, beta).unwrap() >= fb - 1e-12);
            prop_assert_eq!(fb.to_bits(), f_measure(p, r, beta).unwrap().to_bits());
        }
    }
}
