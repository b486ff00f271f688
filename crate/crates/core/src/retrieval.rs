//! BM25 and TF-IDF cosine ranking over a passage collection.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize_words, Passage};

pub const DEFAULT_DEPTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub passage_id: String,
    pub score: f64,
}

/// Top-k passages for one query, scores non-increasing, ties by passage id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn passage_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.passage_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Writes TREC run lines: `qid Q0 pid rank score tag`.
pub fn format_run(lists: &[RankedList], tag: &str) -> String {
    let mut out = String::new();
    for list in lists {
        for (i, e) in list.entries.iter().enumerate() {
            let _ = writeln!(
                out,
                "{} Q0 {} {} {:.6} {}",
                list.query_id,
                e.passage_id,
                i + 1,
                e.score,
                tag
            );
        }
    }
    out
}

/// Parses TREC run lines back into ranked lists, in file order.
pub fn parse_run(text: &str) -> Result<Vec<RankedList>, String> {
    let mut lists: Vec<RankedList> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(format!("line {}: expected 6 fields, got {}", i + 1, f.len()));
        }
        let score: f64 = f[4]
            .parse()
            .map_err(|_| format!("line {}: bad score `{}`", i + 1, f[4]))?;
        let entry = RankedEntry {
            passage_id: f[2].to_string(),
            score,
        };
        match lists.last_mut() {
            Some(l) if l.query_id == f[0] => l.entries.push(entry),
            _ => lists.push(RankedList {
                query_id: f[0].to_string(),
                entries: vec![entry],
            }),
        }
    }
    Ok(lists)
}

fn top_k(query_id: &str, ids: &[String], scores: &[f64], k: usize) -> RankedList {
    let mut hits: Vec<(usize, f64)> = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, s)| *s > 0.0)
        .collect();
    let cmp = |a: &(usize, f64), b: &(usize, f64)| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ids[a.0].cmp(&ids[b.0]))
    };
    if hits.len() > k {
        hits.select_nth_unstable_by(k, cmp);
        hits.truncate(k);
    }
    hits.sort_by(cmp);
    RankedList {
        query_id: query_id.to_string(),
        entries: hits
            .into_iter()
            .map(|(i, score)| RankedEntry {
                passage_id: ids[i].clone(),
                score,
            })
            .collect(),
    }
}

/// Term posting: (document index, term frequency).
type Postings = HashMap<String, Vec<(u32, u32)>>;

fn build_postings(passages: &[Passage]) -> (Postings, Vec<usize>) {
    let mut postings: Postings = HashMap::new();
    let mut lengths = Vec::with_capacity(passages.len());
    for (d, p) in passages.iter().enumerate() {
        let toks = tokenize_words(&p.text);
        lengths.push(toks.len());
        let mut tf: HashMap<String, u32> = HashMap::new();
        for t in toks {
            *tf.entry(t).or_insert(0) += 1;
        }
        for (t, n) in tf {
            postings.entry(t).or_default().push((d as u32, n));
        }
    }
    // HashMap iteration above is unordered per document but documents are
    // visited in order, so each posting list is already sorted by doc.
    (postings, lengths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryTerms {
    /// Each distinct query term counted once.
    #[default]
    Unique,
    /// Repeated query terms contribute repeatedly.
    Multiset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    pub query_terms: QueryTerms,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params {
            k1: 1.5,
            b: 0.75,
            query_terms: QueryTerms::Unique,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bm25Index {
    ids: Vec<String>,
    postings: Postings,
    doc_lengths: Vec<usize>,
    avg_doc_length: f64,
    params: Bm25Params,
}

/// Non-negative BM25 IDF: ln(1 + (N - df + 0.5) / (df + 0.5)).
pub fn bm25_idf(n_docs: usize, df: usize) -> f64 {
    let (n, df) = (n_docs as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Saturated, length-normalized term-frequency factor.
pub fn bm25_tf(tf: f64, doc_len: f64, avg_doc_len: f64, k1: f64, b: f64) -> f64 {
    tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_doc_len))
}

impl Bm25Index {
    pub fn build(passages: &[Passage]) -> Self {
        Self::with_params(passages, Bm25Params::default())
    }

    pub fn with_params(passages: &[Passage], params: Bm25Params) -> Self {
        let (postings, doc_lengths) = build_postings(passages);
        let total: usize = doc_lengths.iter().sum();
        let avg_doc_length = if doc_lengths.is_empty() {
            0.0
        } else {
            total as f64 / doc_lengths.len() as f64
        };
        Bm25Index {
            ids: passages.iter().map(|p| p.id.clone()).collect(),
            postings,
            doc_lengths,
            avg_doc_length,
            params,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Scores for every passage, in collection order.
    pub fn score_all(&self, query: &str) -> Vec<f64> {
        let mut scores = vec![0.0; self.ids.len()];
        let mut terms = tokenize_words(query);
        if self.params.query_terms == QueryTerms::Unique {
            let mut seen = std::collections::HashSet::new();
            terms.retain(|t| seen.insert(t.clone()));
        }
        let Bm25Params { k1, b, .. } = self.params;
        for t in &terms {
            let Some(list) = self.postings.get(t) else {
                continue;
            };
            let idf = bm25_idf(self.ids.len(), list.len());
            for &(d, tf) in list {
                let len = self.doc_lengths[d as usize] as f64;
                scores[d as usize] += idf * bm25_tf(tf as f64, len, self.avg_doc_length, k1, b);
            }
        }
        scores
    }

    pub fn rank(&self, query_id: &str, query: &str, k: usize) -> RankedList {
        top_k(query_id, &self.ids, &self.score_all(query), k)
    }
}

#[derive(Debug, Clone)]
pub struct TfidfIndex {
    ids: Vec<String>,
    /// term -> (doc, tf·idf weight)
    weights: HashMap<String, Vec<(u32, f64)>>,
    idf: HashMap<String, f64>,
    norms: Vec<f64>,
}

/// Smoothed IDF: ln((1 + N) / (1 + df)) + 1.
pub fn tfidf_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

impl TfidfIndex {
    pub fn build(passages: &[Passage]) -> Self {
        let (postings, _) = build_postings(passages);
        let n = passages.len();
        let mut norms_sq = vec![0.0; n];
        let mut weights = HashMap::with_capacity(postings.len());
        let mut idf_map = HashMap::with_capacity(postings.len());
        // sorted so the floating-point norm sums are reproducible
        let mut postings: Vec<_> = postings.into_iter().collect();
        postings.sort_by(|a, b| a.0.cmp(&b.0));
        for (term, list) in postings {
            let idf = tfidf_idf(n, list.len());
            let w: Vec<(u32, f64)> = list
                .into_iter()
                .map(|(d, tf)| (d, tf as f64 * idf))
                .collect();
            for &(d, x) in &w {
                norms_sq[d as usize] += x * x;
            }
            idf_map.insert(term.clone(), idf);
            weights.insert(term, w);
        }
        TfidfIndex {
            ids: passages.iter().map(|p| p.id.clone()).collect(),
            weights,
            idf: idf_map,
            norms: norms_sq.into_iter().map(f64::sqrt).collect(),
        }
    }

    pub fn doc_count(&self) -> usize {
        self.ids.len()
    }

    pub fn norm(&self, doc: usize) -> f64 {
        self.norms[doc]
    }

    /// Query term weights over indexed terms only, in first-occurrence order.
    pub fn query_vector(&self, query: &str) -> Vec<(String, f64)> {
        let mut counts: Vec<(String, f64)> = Vec::new();
        for t in tokenize_words(query) {
            if !self.idf.contains_key(&t) {
                continue;
            }
            match counts.iter_mut().find(|(w, _)| *w == t) {
                Some((_, c)) => *c += 1.0,
                None => counts.push((t, 1.0)),
            }
        }
        for (t, c) in &mut counts {
            *c *= self.idf[t];
        }
        counts
    }

    /// Cosine similarity of the query with every passage.
    pub fn score_all(&self, query: &str) -> Vec<f64> {
        let mut scores = vec![0.0; self.ids.len()];
        let q = self.query_vector(query);
        let q_norm = q.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if q_norm == 0.0 {
            return scores;
        }
        for (t, qw) in &q {
            for &(d, w) in &self.weights[t] {
                scores[d as usize] += qw * w;
            }
        }
        for (d, s) in scores.iter_mut().enumerate() {
            if *s > 0.0 {
                *s /= q_norm * self.norms[d];
            }
        }
        scores
    }

    pub fn rank(&self, query_id: &str, query: &str, k: usize) -> RankedList {
        top_k(query_id, &self.ids, &self.score_all(query), k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrieverKind {
    Bm25,
    Tfidf,
}

impl RetrieverKind {
    pub const ALL: [RetrieverKind; 2] = [RetrieverKind::Bm25, RetrieverKind::Tfidf];

    pub fn as_str(self) -> &'static str {
        match self {
            RetrieverKind::Bm25 => "bm25",
            RetrieverKind::Tfidf => "tfidf",
        }
    }
}

impl fmt::Display for RetrieverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetrieverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bm25" => Ok(RetrieverKind::Bm25),
            "tfidf" | "tf-idf" => Ok(RetrieverKind::Tfidf),
            _ => Err(format!("unknown retriever `{s}`")),
        }
    }
}

/// Either index behind one ranking call.
#[derive(Debug, Clone)]
pub enum Retriever {
    Bm25(Bm25Index),
    Tfidf(TfidfIndex),
}

impl Retriever {
    pub fn build(kind: RetrieverKind, passages: &[Passage]) -> Self {
        match kind {
            RetrieverKind::Bm25 => Retriever::Bm25(Bm25Index::build(passages)),
            RetrieverKind::Tfidf => Retriever::Tfidf(TfidfIndex::build(passages)),
        }
    }

    pub fn rank(&self, query_id: &str, query: &str, k: usize) -> RankedList {
        match self {
            Retriever::Bm25(i) => i.rank(query_id, query, k),
            Retriever::Tfidf(i) => i.rank(query_id, query, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> Vec<Passage> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Passage {
                id: format!("d{}", i + 1),
                text: t.to_string(),
                source: None,
            })
            .collect()
    }

    #[test]
    fn bm25_micro_corpus() {
        let idx = Bm25Index::build(&corpus(&["a b", "a a b", "c"]));
        let r = idx.rank("q", "a", 10);
        let ids: Vec<_> = r.passage_ids().collect();
        assert_eq!(ids, vec!["d2", "d1"]);
        // N=3, df(a)=2, avgdl=2
        let idf = (1.0f64 + 1.5 / 2.5).ln();
        let d1 = idf * 2.5 / (1.0 + 1.5);
        let d2 = idf * 2.0 * 2.5 / (2.0 + 1.5 * (0.25 + 0.75 * 1.5));
        assert_relative_eq!(r.entries[0].score, d2, epsilon = 1e-12);
        assert_relative_eq!(r.entries[1].score, d1, epsilon = 1e-12);
    }

    #[test]
    fn absent_terms_contribute_nothing() {
        let idx = Bm25Index::build(&corpus(&["a b", "a a b", "c"]));
        assert_eq!(idx.rank("q", "a zzz", 10), idx.rank("q", "a", 10));
        assert!(idx.rank("q", "zzz", 10).is_empty());
        assert!(idx.rank("q", "", 10).is_empty());
    }

    #[test]
    fn tfidf_identity_and_orthogonal() {
        let idx = TfidfIndex::build(&corpus(&["kidney stone pain"]));
        let r = idx.rank("q", "kidney stone pain", 5);
        assert_relative_eq!(r.entries[0].score, 1.0, epsilon = 1e-12);
        assert!(idx.rank("q", "headache", 5).is_empty());
        assert!(idx.rank("q", "", 5).is_empty());
    }

    #[test]
    fn tfidf_matches_dense_oracle() {
        let texts = ["a b", "a a b", "c", "b c c d"];
        let ps = corpus(&texts);
        let idx = TfidfIndex::build(&ps);
        let query = "a c c e";
        let vocab = ["a", "b", "c", "d"];
        let n = texts.len();
        let dense = |text: &str| -> Vec<f64> {
            let toks = tokenize_words(text);
            vocab
                .iter()
                .map(|v| {
                    let tf = toks.iter().filter(|t| t == v).count() as f64;
                    let df = texts.iter().filter(|d| tokenize_words(d).contains(&v.to_string())).count();
                    tf * (((1 + n) as f64 / (1 + df) as f64).ln() + 1.0)
                })
                .collect()
        };
        let qv = dense(query);
        let scores = idx.score_all(query);
        for (i, t) in texts.iter().enumerate() {
            let dv = dense(t);
            let dot: f64 = qv.iter().zip(&dv).map(|(x, y)| x * y).sum();
            let nq = qv.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nd = dv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert_relative_eq!(scores[i], dot / (nq * nd), epsilon = 1e-12);
        }
    }

    #[test]
    fn ties_break_by_id_and_k_truncates() {
        let idx = Bm25Index::build(&corpus(&["x y", "x z", "x w", "q"]));
        let r = idx.rank("q", "x", 2);
        let ids: Vec<_> = r.passage_ids().collect();
        assert_eq!(ids, vec!["d1", "d2"]);
    }

    #[test]
    fn run_file_round_trip() {
        let idx = Bm25Index::build(&corpus(&["a b", "a a b", "c"]));
        let lists = vec![idx.rank("q1", "a", 10), idx.rank("q2", "c", 10)];
        let text = format_run(&lists, "bm25");
        assert!(text.starts_with("q1 Q0 d2 1 "));
        let back = parse_run(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].passage_ids().collect::<Vec<_>>(), vec!["d2", "d1"]);
    }

    #[test]
    fn idf_non_negative() {
        for n in 1..50 {
            for df in 0..=n {
                assert!(bm25_idf(n, df) >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn bm25_tf_monotone(tf in 1.0f64..50.0, len in 1.0f64..500.0, avg in 1.0f64..200.0) {
            let base = bm25_tf(tf, len, avg, 1.5, 0.75);
            prop_assert!(bm25_tf(tf + 1.0, len, avg, 1.5, 0.75) > base);
            prop_assert!(bm25_tf(tf, len + 1.0, avg, 1.5, 0.75) < base);
        }

        #[test]
        fn cosine_bounded_and_scale_invariant(
            docs in proptest::collection::vec("[a-f]( [a-f]){0,8}", 1..8),
            query in "[a-g]( [a-g]){0,4}",
            reps in 2usize..4,
        ) {
            let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
            let idx = TfidfIndex::build(&corpus(&refs));
            let r = idx.rank("q", &query, 20);
            for e in &r.entries {
                prop_assert!(e.score > 0.0 && e.score <= 1.0 + 1e-12);
            }
            let scaled = vec![query.as_str(); reps].join(" ");
            let r2 = idx.rank("q", &scaled, 20);
            let a: Vec<_> = r.passage_ids().collect();
            let b: Vec<_> = r2.passage_ids().collect();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn ranking_invariants(
            docs in proptest::collection::vec("[a-f]( [a-f]){0,8}", 1..12),
            query in "[a-g]( [a-g]){0,4}",
        ) {
            let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
            let ps = corpus(&refs);
            for kind in RetrieverKind::ALL {
                let r = Retriever::build(kind, &ps).rank("q", &query, 5);
                prop_assert!(r.len() <= 5);
                for w in r.entries.windows(2) {
                    prop_assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].passage_id < w[1].passage_id));
                }
                let again = Retriever::build(kind, &ps).rank("q", &query, 5);
                prop_assert_eq!(format_run(&[r], "t"), format_run(&[again], "t"));
            }
        }
    }
}
