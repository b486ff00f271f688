//! Experiment grid: query/corpus correction conditions × correction methods ×
//! retrievers, evaluated against graded judgments.

pub mod analysis;
pub mod report;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::census::{self, ErrorCensus};
use crate::corpus::{
    build_vocabulary, corpus_hash, load_jsonl, save_jsonl, tokenize, Judgment, Passage, QueryRecord,
};
use crate::correct::{
    ConfusablePairs, CorrectionCache, Corrector, CorrectorConfig, Lexicon, Method, Reason,
    TokenCorrection,
};
use crate::error::HarnessError;
use crate::metrics::{evaluate, paired_bootstrap_ci, GradePolicy, Interval, MetricsRow, Qrels, QueryMetrics};
use crate::retrieval::{RankedList, Retriever, RetrieverKind};
use crate::symspell::delete_meet_misses;

pub use analysis::{categorize_correction, error_analysis, CorrectionCategory, ErrorAnalysis, LoggedCorrection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Exp2,
    Exp3a,
    Exp3b,
    Exp4,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::Exp2, Condition::Exp3a, Condition::Exp3b, Condition::Exp4];

    pub fn query_corrected(self) -> bool {
        matches!(self, Condition::Exp3b | Condition::Exp4)
    }

    pub fn corpus_corrected(self) -> bool {
        matches!(self, Condition::Exp3a | Condition::Exp4)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Exp2 => "exp2",
            Condition::Exp3a => "exp3a",
            Condition::Exp3b => "exp3b",
            Condition::Exp4 => "exp4",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Condition::Exp2 => "Exp 2: Baseline",
            Condition::Exp3a => "Exp 3a: Orig Q x Corr C",
            Condition::Exp3b => "Exp 3b: Corr Q x Orig C",
            Condition::Exp4 => "Exp 4: Both Corrected",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

/// One cell of the grid. The baseline carries no method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellSpec {
    pub condition: Condition,
    pub method: Option<Method>,
    pub retriever: RetrieverKind,
}

impl CellSpec {
    pub fn new(condition: Condition, method: Option<Method>, retriever: RetrieverKind) -> Self {
        let method = if condition == Condition::Exp2 { None } else { method };
        CellSpec {
            condition,
            method,
            retriever,
        }
    }

    pub fn tag(&self) -> String {
        let method = self.method.map_or("none", Method::as_str);
        format!("{}_{}_{}", self.retriever, self.condition, method)
    }
}

/// The full grid in report order.
pub fn grid_cells(methods: &[Method], retrievers: &[RetrieverKind]) -> Vec<CellSpec> {
    let mut out = Vec::new();
    for &r in retrievers {
        out.push(CellSpec::new(Condition::Exp2, None, r));
        for c in [Condition::Exp3a, Condition::Exp3b, Condition::Exp4] {
            for &m in methods {
                out.push(CellSpec::new(c, Some(m), r));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub min_freq: u64,
    pub k: usize,
    pub seed: u64,
    pub min_token_len: usize,
    pub policy: GradePolicy,
    pub analysis_cap: usize,
    pub bootstrap_resamples: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            min_freq: 2,
            k: crate::retrieval::DEFAULT_DEPTH,
            seed: 42,
            min_token_len: 0,
            policy: GradePolicy::default(),
            analysis_cap: 100,
            bootstrap_resamples: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Datasets {
    pub queries: Vec<QueryRecord>,
    pub passages: Vec<Passage>,
    pub judgments: Vec<Judgment>,
}

impl Datasets {
    pub fn load(queries: &Path, passages: &Path, judgments: &Path) -> Result<Self, HarnessError> {
        Ok(Datasets {
            queries: load_jsonl(queries)?,
            passages: load_jsonl(passages)?,
            judgments: load_jsonl(judgments)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectedQuery {
    pub query_id: String,
    pub text: String,
    pub corrections: Vec<TokenCorrection>,
}

/// Everything one correction method produces: corrected queries and corpus.
#[derive(Debug)]
pub struct MethodCorrections {
    pub method: Method,
    pub cache: CorrectionCache,
    pub queries: Vec<CorrectedQuery>,
    pub passages: Vec<Passage>,
    /// Query tokens for which the delete index missed a linear-scan candidate.
    pub delete_meet_misses: usize,
}

impl MethodCorrections {
    pub fn queries_modified(&self) -> usize {
        self.queries
            .iter()
            .filter(|q| q.corrections.iter().any(|c| c.changed))
            .count()
    }

    pub fn token_changes(&self) -> usize {
        self.queries
            .iter()
            .map(|q| q.corrections.iter().filter(|c| c.changed).count())
            .sum()
    }

    pub fn log(&self) -> Vec<LoggedCorrection> {
        let mut out = Vec::new();
        for q in &self.queries {
            for (position, c) in q.corrections.iter().enumerate() {
                if c.changed {
                    out.push(LoggedCorrection {
                        query_id: q.query_id.clone(),
                        position,
                        correction: c.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn query_hash(&self) -> String {
        let mut h = Sha256::new();
        for q in &self.queries {
            h.update(q.query_id.as_bytes());
            h.update([0]);
            h.update(q.text.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }

    pub fn corpus_hash(&self) -> String {
        corpus_hash(&self.passages)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub spec: CellSpec,
    pub row: MetricsRow,
    pub per_query: Vec<QueryMetrics>,
    #[serde(skip)]
    pub runs: Vec<RankedList>,
}

/// Retriever over the corpus as corrected by the method, or the original corpus.
type IndexKey = (RetrieverKind, Option<Method>);

pub struct Experiment {
    pub settings: Settings,
    pub all_queries: Vec<QueryRecord>,
    /// Queries that have judgments, in input order.
    pub eval_queries: Vec<QueryRecord>,
    pub passages: Vec<Passage>,
    pub qrels: Qrels,
    pub lexicon: Lexicon,
    pub blacklist: ConfusablePairs,
    cache_dir: Option<PathBuf>,
    corrections: Mutex<BTreeMap<Method, Arc<MethodCorrections>>>,
    indexes: Mutex<BTreeMap<IndexKey, Arc<Retriever>>>,
}

impl Experiment {
    pub fn new(data: Datasets, settings: Settings, blacklist: ConfusablePairs) -> Result<Self, HarnessError> {
        if data.judgments.is_empty() {
            return Err(HarnessError::MissingJudgments);
        }
        if settings.k < 10 {
            return Err(HarnessError::InvalidConfig(format!(
                "k must be at least 10, got {}",
                settings.k
            )));
        }
        let qrels = Qrels::from_judgments(&data.judgments);
        let eval_queries: Vec<QueryRecord> = data
            .queries
            .iter()
            .filter(|q| qrels.contains(&q.id))
            .cloned()
            .collect();
        if eval_queries.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "no query has judgments".into(),
            ));
        }
        let vocab = build_vocabulary(&data.passages, settings.min_freq)?;
        let lexicon = Lexicon::build(vocab, &data.passages)?;
        Ok(Experiment {
            settings,
            all_queries: data.queries,
            eval_queries,
            passages: data.passages,
            qrels,
            lexicon,
            blacklist,
            cache_dir: None,
            corrections: Mutex::new(BTreeMap::new()),
            indexes: Mutex::new(BTreeMap::new()),
        })
    }

    /// Directory where corrected corpora are stored between runs.
    pub fn with_cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn corrector_config(&self, method: Method) -> CorrectorConfig {
        CorrectorConfig::for_method(method).with_min_token_len(self.settings.min_token_len)
    }

    /// Distinct word types across the evaluation queries and the corpus.
    pub fn word_type_count(&self) -> usize {
        let mut types = HashSet::new();
        let texts = self
            .eval_queries
            .iter()
            .map(|q| q.original_text.as_str())
            .chain(self.passages.iter().map(|p| p.text.as_str()));
        for t in texts {
            types.extend(tokenize(t).into_iter().map(|t| t.text));
        }
        types.len()
    }

    fn artifact_key(&self, method: Method) -> String {
        let mut h = Sha256::new();
        h.update(corpus_hash(&self.passages).as_bytes());
        h.update(self.lexicon.vocab.fingerprint().as_bytes());
        h.update(serde_json::to_vec(&self.corrector_config(method)).expect("config serializes"));
        for (a, b) in self.blacklist.pairs() {
            h.update(a.as_bytes());
            h.update([0]);
            h.update(b.as_bytes());
            h.update([0]);
        }
        let digest = hex::encode(h.finalize());
        format!("corrected-{}-{}.jsonl", method, &digest[..16])
    }

    /// Corrects the evaluation queries and the corpus with `method`, once.
    pub fn corrections(&self, method: Method) -> Result<Arc<MethodCorrections>, HarnessError> {
        if let Some(done) = self.corrections.lock().expect("poisoned").get(&method) {
            return Ok(done.clone());
        }
        let computed = Arc::new(self.compute_corrections(method)?);
        Ok(self
            .corrections
            .lock()
            .expect("poisoned")
            .entry(method)
            .or_insert(computed)
            .clone())
    }

    fn compute_corrections(&self, method: Method) -> Result<MethodCorrections, HarnessError> {
        let corrector = Corrector::new(self.corrector_config(method), &self.lexicon, &self.blacklist)?;
        let query_texts = self.eval_queries.iter().map(|q| q.original_text.as_str());

        let stored = match &self.cache_dir {
            Some(dir) => {
                let path = dir.join(self.artifact_key(method));
                if path.exists() {
                    Some(load_jsonl::<Passage>(&path)?)
                } else {
                    None
                }
            }
            None => None,
        };

        let cache = match stored {
            Some(_) => corrector.build_cache(query_texts),
            None => corrector.build_cache(
                query_texts.chain(self.passages.iter().map(|p| p.text.as_str())),
            ),
        };

        let queries: Vec<CorrectedQuery> = self
            .eval_queries
            .iter()
            .map(|q| {
                let out = corrector.correct_text_cached(&q.original_text, &cache);
                CorrectedQuery {
                    query_id: q.id.clone(),
                    text: out.text,
                    corrections: out.corrections,
                }
            })
            .collect();

        let passages = match stored {
            Some(p) => p,
            None => {
                let corrected: Vec<Passage> = self
                    .passages
                    .par_iter()
                    .map(|p| Passage {
                        id: p.id.clone(),
                        text: corrector.correct_text_cached(&p.text, &cache).text,
                        source: p.source.clone(),
                    })
                    .collect();
                if let Some(dir) = &self.cache_dir {
                    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
                    save_jsonl(&corrected, &dir.join(self.artifact_key(method)))?;
                }
                corrected
            }
        };

        let mut delete_meet = 0;
        if method == Method::Symspell {
            let mut checked = BTreeSet::new();
            for q in &queries {
                for c in &q.corrections {
                    let searched = matches!(c.reason, Reason::NoCandidate | Reason::Corrected | Reason::BlacklistBlocked);
                    if searched && checked.insert(c.original.clone()) {
                        let misses = delete_meet_misses(
                            &c.original,
                            &self.lexicon.index,
                            &self.lexicon.vocab,
                            2,
                        )?;
                        if !misses.is_empty() {
                            delete_meet += 1;
                        }
                    }
                }
            }
            log::info!("symspell: {delete_meet} query types lost candidates to the delete meet");
        }

        Ok(MethodCorrections {
            method,
            cache,
            queries,
            passages,
            delete_meet_misses: delete_meet,
        })
    }

    fn retriever(&self, kind: RetrieverKind, corpus_method: Option<Method>) -> Result<Arc<Retriever>, HarnessError> {
        let key = (kind, corpus_method);
        if let Some(r) = self.indexes.lock().expect("poisoned").get(&key) {
            return Ok(r.clone());
        }
        let built = Arc::new(match corpus_method {
            None => Retriever::build(kind, &self.passages),
            Some(m) => Retriever::build(kind, &self.corrections(m)?.passages),
        });
        Ok(self
            .indexes
            .lock()
            .expect("poisoned")
            .entry(key)
            .or_insert(built)
            .clone())
    }

    pub fn run_cell(&self, spec: CellSpec) -> Result<CellResult, HarnessError> {
        let method = match (spec.condition, spec.method) {
            (Condition::Exp2, _) => None,
            (_, Some(m)) => Some(m),
            (c, None) => {
                return Err(HarnessError::InvalidConfig(format!(
                    "condition {c} needs a correction method"
                )))
            }
        };
        let corpus_method = method.filter(|_| spec.condition.corpus_corrected());
        let retriever = self.retriever(spec.retriever, corpus_method)?;
        let corrected = match method.filter(|_| spec.condition.query_corrected()) {
            Some(m) => Some(self.corrections(m)?),
            None => None,
        };
        let k = self.settings.k;
        let runs: Vec<RankedList> = self
            .eval_queries
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let text = match &corrected {
                    Some(c) => c.queries[i].text.as_str(),
                    None => q.original_text.as_str(),
                };
                retriever.rank(&q.id, text, k)
            })
            .collect();
        let eval = evaluate(&runs, &self.qrels, k, &self.settings.policy);
        Ok(CellResult {
            spec,
            row: eval.row,
            per_query: eval.per_query,
            runs,
        })
    }

    pub fn run_grid(&self, cells: &[CellSpec]) -> Result<Vec<CellResult>, HarnessError> {
        // correct once per method up front so cells don't race to do it
        let methods: BTreeSet<Method> = cells.iter().filter_map(|c| c.method).collect();
        for m in methods {
            self.corrections(m)?;
        }
        cells.par_iter().map(|c| self.run_cell(*c)).collect()
    }

    pub fn census(&self) -> Option<ErrorCensus> {
        if self.all_queries.iter().any(|q| q.paraphrase_text.is_none()) {
            return None;
        }
        census::census(&self.all_queries, &self.lexicon.vocab)
            .ok()
            .map(|r| r.census)
    }

    pub fn paraphrase_tokens(&self) -> BTreeMap<String, HashSet<String>> {
        self.eval_queries
            .iter()
            .filter_map(|q| {
                q.paraphrase_text.as_ref().map(|p| {
                    (
                        q.id.clone(),
                        tokenize(p).into_iter().map(|t| t.text).collect(),
                    )
                })
            })
            .collect()
    }

    pub fn error_analysis(&self, method: Method) -> Result<ErrorAnalysis, HarnessError> {
        let c = self.corrections(method)?;
        Ok(error_analysis(
            method,
            &c.log(),
            &self.paraphrase_tokens(),
            self.settings.analysis_cap,
            self.settings.seed,
        )?)
    }

    pub fn modification_summary(&self, method: Method) -> Result<ModificationSummary, HarnessError> {
        let c = self.corrections(method)?;
        Ok(ModificationSummary {
            method,
            queries_modified: c.queries_modified(),
            total_queries: c.queries.len(),
            token_changes: c.token_changes(),
            delete_meet_misses: (method == Method::Symspell).then_some(c.delete_meet_misses),
        })
    }

    /// Runs the grid and gathers everything the report needs.
    pub fn full_report(&self, methods: &[Method], retrievers: &[RetrieverKind]) -> Result<(GridReport, Vec<CellResult>), HarnessError> {
        let cells = self.run_grid(&grid_cells(methods, retrievers))?;
        let mut modifications = Vec::new();
        let mut analyses = Vec::new();
        for &m in methods {
            modifications.push(self.modification_summary(m)?);
            analyses.push(self.error_analysis(m)?);
        }
        let mut intervals = Vec::new();
        for &r in retrievers {
            let Some(base) = cells
                .iter()
                .find(|c| c.spec.retriever == r && c.spec.condition == Condition::Exp2)
            else {
                continue;
            };
            let base_rr: Vec<f64> = base.per_query.iter().map(|q| q.reciprocal_rank).collect();
            for cell in cells.iter().filter(|c| c.spec.retriever == r && c.spec.condition != Condition::Exp2) {
                let rr: Vec<f64> = cell.per_query.iter().map(|q| q.reciprocal_rank).collect();
                if rr.len() < 2 {
                    continue;
                }
                let interval = paired_bootstrap_ci(
                    &rr,
                    &base_rr,
                    self.settings.bootstrap_resamples,
                    0.95,
                    self.settings.seed,
                )?;
                intervals.push(DeltaInterval {
                    spec: cell.spec,
                    metric: "mrr".into(),
                    interval,
                });
            }
        }
        let report = GridReport {
            settings: self.settings.clone(),
            n_queries: self.all_queries.len(),
            n_eval_queries: self.eval_queries.len(),
            n_passages: self.passages.len(),
            vocabulary_size: self.lexicon.vocab.total_types(),
            word_types: self.word_type_count(),
            census: self.census(),
            cells: cells
                .iter()
                .map(|c| CellSummary {
                    spec: c.spec,
                    row: c.row.clone(),
                })
                .collect(),
            modifications,
            analyses,
            intervals,
        };
        Ok((report, cells))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModificationSummary {
    pub method: Method,
    pub queries_modified: usize,
    pub total_queries: usize,
    pub token_changes: usize,
    pub delete_meet_misses: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub spec: CellSpec,
    pub row: MetricsRow,
}

/// Bootstrap interval for a cell's metric minus the baseline's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaInterval {
    pub spec: CellSpec,
    pub metric: String,
    pub interval: Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub settings: Settings,
    pub n_queries: usize,
    pub n_eval_queries: usize,
    pub n_passages: usize,
    pub vocabulary_size: usize,
    pub word_types: usize,
    pub census: Option<ErrorCensus>,
    pub cells: Vec<CellSummary>,
    pub modifications: Vec<ModificationSummary>,
    pub analyses: Vec<ErrorAnalysis>,
    pub intervals: Vec<DeltaInterval>,
}

impl GridReport {
    pub fn cell(&self, retriever: RetrieverKind, condition: Condition, method: Option<Method>) -> Option<&MetricsRow> {
        let spec = CellSpec::new(condition, method, retriever);
        self.cells.iter().find(|c| c.spec == spec).map(|c| &c.row)
    }
}

/// Parameters for a single-cell run from the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub queries: PathBuf,
    pub passages: PathBuf,
    pub judgments: PathBuf,
    pub blacklist: Option<PathBuf>,
    pub retriever: RetrieverKind,
    pub method: Option<Method>,
    pub condition: Condition,
    pub settings: Settings,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        for (name, p) in [
            ("queries", &self.queries),
            ("passages", &self.passages),
            ("judgments", &self.judgments),
        ] {
            if !p.exists() {
                return Err(HarnessError::InvalidConfig(format!(
                    "{name} file {} does not exist",
                    p.display()
                )));
            }
        }
        if let Some(b) = &self.blacklist {
            if !b.exists() {
                return Err(HarnessError::InvalidConfig(format!(
                    "blacklist file {} does not exist",
                    b.display()
                )));
            }
        }
        if self.settings.k < 10 {
            return Err(HarnessError::InvalidConfig(format!(
                "k must be at least 10, got {}",
                self.settings.k
            )));
        }
        if self.condition != Condition::Exp2 && self.method.is_none() {
            return Err(HarnessError::InvalidConfig(format!(
                "condition {} needs --method",
                self.condition
            )));
        }
        Ok(())
    }

    pub fn experiment(&self) -> Result<Experiment, HarnessError> {
        self.validate()?;
        let data = Datasets::load(&self.queries, &self.passages, &self.judgments)?;
        let blacklist = match &self.blacklist {
            Some(p) => ConfusablePairs::load(p)?,
            None => ConfusablePairs::new(),
        };
        Experiment::new(data, self.settings.clone(), blacklist)
    }

    pub fn spec(&self) -> CellSpec {
        CellSpec::new(self.condition, self.method, self.retriever)
    }
}
