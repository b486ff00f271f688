//! Graded relevance metrics (Recall@k, MRR, NDCG@10) and bootstrap intervals.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Judgment;
use crate::error::MetricsError;
use crate::retrieval::RankedList;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    /// grade - 1
    #[default]
    Linear,
    /// 2^(grade-1) - 1
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradePolicy {
    pub relevant_threshold: u8,
    pub gain: Gain,
}

impl Default for GradePolicy {
    fn default() -> Self {
        GradePolicy {
            relevant_threshold: 2,
            gain: Gain::Linear,
        }
    }
}

impl GradePolicy {
    pub fn gain(&self, grade: u8) -> f64 {
        let g = grade.saturating_sub(1) as i32;
        match self.gain {
            Gain::Linear => g as f64,
            Gain::Exponential => 2f64.powi(g) - 1.0,
        }
    }

    pub fn is_relevant(&self, grade: u8) -> bool {
        grade >= self.relevant_threshold
    }
}

/// Judged grades for one query; unjudged passages read as grade 1.
pub type QueryJudgments = HashMap<String, u8>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    by_query: BTreeMap<String, QueryJudgments>,
}

impl Qrels {
    pub fn from_judgments(judgments: &[Judgment]) -> Self {
        let mut by_query: BTreeMap<String, QueryJudgments> = BTreeMap::new();
        for j in judgments {
            by_query
                .entry(j.query_id.clone())
                .or_default()
                .insert(j.passage_id.clone(), j.grade);
        }
        Qrels { by_query }
    }

    pub fn get(&self, query_id: &str) -> Option<&QueryJudgments> {
        self.by_query.get(query_id)
    }

    pub fn contains(&self, query_id: &str) -> bool {
        self.by_query.contains_key(query_id)
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.by_query.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_query.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_query.is_empty()
    }
}

fn grade_of(judged: &QueryJudgments, pid: &str) -> u8 {
    judged.get(pid).copied().unwrap_or(1)
}

/// Relevant passages in the top `k` over all relevant judged passages;
/// `None` when the query has no relevant passage.
pub fn recall_at_k(
    ranked: &RankedList,
    judged: &QueryJudgments,
    k: usize,
    policy: &GradePolicy,
) -> Option<f64> {
    let total = judged.values().filter(|g| policy.is_relevant(**g)).count();
    if total == 0 {
        return None;
    }
    let hits = ranked
        .passage_ids()
        .take(k)
        .filter(|pid| policy.is_relevant(grade_of(judged, pid)))
        .count();
    Some(hits as f64 / total as f64)
}

/// 1/rank of the first relevant passage within `depth`, else 0.
pub fn reciprocal_rank(
    ranked: &RankedList,
    judged: &QueryJudgments,
    depth: usize,
    policy: &GradePolicy,
) -> f64 {
    ranked
        .passage_ids()
        .take(depth)
        .position(|pid| policy.is_relevant(grade_of(judged, pid)))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

fn dcg(gains: impl Iterator<Item = f64>) -> f64 {
    gains
        .enumerate()
        .map(|(i, g)| g / ((i + 2) as f64).log2())
        .sum()
}

pub fn ndcg_at_k(ranked: &RankedList, judged: &QueryJudgments, k: usize, policy: &GradePolicy) -> f64 {
    let actual = dcg(
        ranked
            .passage_ids()
            .take(k)
            .map(|pid| policy.gain(grade_of(judged, pid))),
    );
    let mut ideal: Vec<f64> = judged.values().map(|g| policy.gain(*g)).collect();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let best = dcg(ideal.into_iter().take(k));
    if best > 0.0 {
        actual / best
    } else {
        0.0
    }
}

pub fn ndcg_at_10(ranked: &RankedList, judged: &QueryJudgments, policy: &GradePolicy) -> f64 {
    ndcg_at_k(ranked, judged, 10, policy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub query_id: String,
    pub reciprocal_rank: f64,
    pub recall_1: Option<f64>,
    pub recall_5: Option<f64>,
    pub recall_10: Option<f64>,
    pub ndcg_10: f64,
}

/// Macro-averaged metrics for one experiment cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub n_queries: usize,
    /// Queries with at least one relevant passage; the recall denominator.
    pub n_with_relevant: usize,
    pub mrr: f64,
    /// MRR averaged over `n_with_relevant` queries only.
    pub mrr_relevant_only: f64,
    pub recall_1: f64,
    pub recall_5: f64,
    pub recall_10: f64,
    pub ndcg_10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub row: MetricsRow,
    pub per_query: Vec<QueryMetrics>,
}

/// Scores every judged query; a query without a run counts as an empty ranking.
pub fn evaluate(
    runs: &[RankedList],
    qrels: &Qrels,
    depth: usize,
    policy: &GradePolicy,
) -> Evaluation {
    let by_id: HashMap<&str, &RankedList> = runs.iter().map(|r| (r.query_id.as_str(), r)).collect();
    let mut per_query = Vec::with_capacity(qrels.len());
    for qid in qrels.query_ids() {
        let judged = qrels.get(qid).expect("listed query");
        let empty = RankedList {
            query_id: qid.to_string(),
            entries: Vec::new(),
        };
        let ranked = by_id.get(qid).copied().unwrap_or(&empty);
        per_query.push(QueryMetrics {
            query_id: qid.to_string(),
            reciprocal_rank: reciprocal_rank(ranked, judged, depth, policy),
            recall_1: recall_at_k(ranked, judged, 1, policy),
            recall_5: recall_at_k(ranked, judged, 5, policy),
            recall_10: recall_at_k(ranked, judged, 10, policy),
            ndcg_10: ndcg_at_10(ranked, judged, policy),
        });
    }
    Evaluation {
        row: aggregate(&per_query),
        per_query,
    }
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = values.fold((0.0, 0), |(s, n), v| (s + v, n + 1));
    (if n > 0 { sum / n as f64 } else { 0.0 }, n)
}

pub fn aggregate(per_query: &[QueryMetrics]) -> MetricsRow {
    let (mrr, n_queries) = mean(per_query.iter().map(|q| q.reciprocal_rank));
    let (ndcg_10, _) = mean(per_query.iter().map(|q| q.ndcg_10));
    let (recall_1, n_with_relevant) = mean(per_query.iter().filter_map(|q| q.recall_1));
    let (recall_5, _) = mean(per_query.iter().filter_map(|q| q.recall_5));
    let (recall_10, _) = mean(per_query.iter().filter_map(|q| q.recall_10));
    let (mrr_relevant_only, _) = mean(
        per_query
            .iter()
            .filter(|q| q.recall_1.is_some())
            .map(|q| q.reciprocal_rank),
    );
    MetricsRow {
        n_queries,
        n_with_relevant,
        mrr,
        mrr_relevant_only,
        recall_1,
        recall_5,
        recall_10,
        ndcg_10,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Percentile bootstrap of the mean over query-level resamples.
///
/// Each resample draws `values.len()` indices uniformly with replacement from
/// a ChaCha8 stream seeded with `seed`. The bounds are the resampled means at
/// sorted positions `round(p * (resamples - 1))` for p = (1 - level) / 2 and
/// its complement.
pub fn bootstrap_ci(
    values: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Interval, MetricsError> {
    if values.len() < 2 {
        return Err(MetricsError::TooFewValues(values.len()));
    }
    if resamples < 1000 {
        return Err(MetricsError::TooFewResamples(resamples));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(MetricsError::InvalidLevel(level));
    }
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let at = |p: f64| means[(p * (resamples - 1) as f64).round() as usize];
    Ok(Interval {
        estimate: values.iter().sum::<f64>() / n as f64,
        lower: at(alpha),
        upper: at(1.0 - alpha),
        level,
    })
}

/// Bootstrap interval of the mean paired difference `treatment - baseline`.
pub fn paired_bootstrap_ci(
    treatment: &[f64],
    baseline: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Interval, MetricsError> {
    if treatment.len() != baseline.len() {
        return Err(MetricsError::LengthMismatch(treatment.len(), baseline.len()));
    }
    let diffs: Vec<f64> = treatment.iter().zip(baseline).map(|(a, b)| a - b).collect();
    bootstrap_ci(&diffs, resamples, level, seed)
}
