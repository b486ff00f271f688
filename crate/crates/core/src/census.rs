//! Paraphrase-grounded spelling-error detection and census statistics.
//!
//! A query token is flagged when it is missing from both the paraphrase and
//! the corpus vocabulary (numeric tokens are exempt). A flag is confirmed as a
//! spelling error when some paraphrase token lies within Levenshtein distance 2.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, QueryRecord, Vocabulary};
use crate::edit::levenshtein;
use crate::error::CensusError;

pub const CONFIRM_MAX_DIST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorType {
    Substitution,
    Insertion,
    Deletion,
    DoubleDeletion,
    /// Distance-2 shapes other than a two-char shortfall.
    OtherDistance2,
    Unmatched,
}

impl ErrorType {
    pub const ALL: [ErrorType; 6] = [
        ErrorType::Substitution,
        ErrorType::Insertion,
        ErrorType::Deletion,
        ErrorType::DoubleDeletion,
        ErrorType::OtherDistance2,
        ErrorType::Unmatched,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::Substitution => "substitution",
            ErrorType::Insertion => "insertion",
            ErrorType::Deletion => "deletion",
            ErrorType::DoubleDeletion => "double_deletion",
            ErrorType::OtherDistance2 => "other_distance2",
            ErrorType::Unmatched => "unmatched",
        }
    }

    pub fn is_confirmed(self) -> bool {
        self != ErrorType::Unmatched
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorLabel {
    pub query_id: String,
    pub token: String,
    pub closest_paraphrase_word: Option<String>,
    pub distance: Option<usize>,
    pub error_type: ErrorType,
}

/// Shape of a confirmed error by distance and length difference
/// (token length minus intended-word length).
pub fn classify_error_type(token: &str, matched_word: &str, distance: usize) -> ErrorType {
    let diff = token.chars().count() as i64 - matched_word.chars().count() as i64;
    match (distance, diff) {
        (1, 0) => ErrorType::Substitution,
        (1, 1) => ErrorType::Insertion,
        (1, -1) => ErrorType::Deletion,
        (2, -2) => ErrorType::DoubleDeletion,
        (2, _) => ErrorType::OtherDistance2,
        _ => ErrorType::Unmatched,
    }
}

/// Paraphrase word nearest to `token`, ties broken lexicographically.
fn closest_word<'a>(token: &str, paraphrase: &'a BTreeSet<String>) -> Option<(&'a str, usize)> {
    let mut best: Option<(&str, usize)> = None;
    // BTreeSet iterates in lexicographic order, so strict < keeps the first tie
    for w in paraphrase {
        let d = levenshtein(token, w);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((w.as_str(), d));
        }
    }
    best
}

/// Per-query tallies behind the census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTally {
    pub query_id: String,
    pub tokens: usize,
    pub oov_flags: usize,
    pub confirmed: usize,
}

pub fn detect_errors(query: &QueryRecord, vocab: &Vocabulary) -> Result<Vec<ErrorLabel>, CensusError> {
    Ok(detect_with_tally(query, vocab)?.0)
}

fn detect_with_tally(
    query: &QueryRecord,
    vocab: &Vocabulary,
) -> Result<(Vec<ErrorLabel>, QueryTally), CensusError> {
    let paraphrase = query
        .paraphrase_text
        .as_deref()
        .ok_or_else(|| CensusError::MissingParaphrase(query.id.clone()))?;
    let para: BTreeSet<String> = tokenize(paraphrase).into_iter().map(|t| t.text).collect();
    let tokens = tokenize(&query.original_text);
    let mut labels = Vec::new();
    for tok in &tokens {
        if tok.numeric || para.contains(&tok.text) || vocab.contains(&tok.text) {
            continue;
        }
        let closest = closest_word(&tok.text, &para);
        let error_type = match closest {
            Some((w, d)) if d <= CONFIRM_MAX_DIST => classify_error_type(&tok.text, w, d),
            _ => ErrorType::Unmatched,
        };
        labels.push(ErrorLabel {
            query_id: query.id.clone(),
            token: tok.text.clone(),
            closest_paraphrase_word: closest.map(|(w, _)| w.to_string()),
            distance: closest.map(|(_, d)| d),
            error_type,
        });
    }
    let tally = QueryTally {
        query_id: query.id.clone(),
        tokens: tokens.len(),
        oov_flags: labels.len(),
        confirmed: labels.iter().filter(|l| l.error_type.is_confirmed()).count(),
    };
    Ok((labels, tally))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCensus {
    pub total_queries: usize,
    pub queries_with_errors: usize,
    pub query_error_rate: f64,
    /// Mean over queries of (confirmed errors / tokens).
    pub token_error_rate: f64,
    /// Confirmed errors over all tokens pooled.
    pub pooled_token_error_rate: f64,
    pub avg_errors_per_query: f64,
    pub avg_errors_per_affected_query: f64,
    pub total_tokens: usize,
    pub confirmed_errors: usize,
    pub oov_flags: usize,
    pub unmatched: usize,
    /// Unmatched flags over all flags.
    pub unmatched_share: f64,
    /// Confirmed flags over all flags.
    pub yield_ratio: Option<f64>,
    /// Percent of all OOV flags per error type.
    pub breakdown: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub census: ErrorCensus,
    pub labels: Vec<ErrorLabel>,
    pub tallies: Vec<QueryTally>,
}

pub fn census(queries: &[QueryRecord], vocab: &Vocabulary) -> Result<CensusReport, CensusError> {
    let mut labels = Vec::new();
    let mut tallies = Vec::with_capacity(queries.len());
    for q in queries {
        let (l, t) = detect_with_tally(q, vocab)?;
        labels.extend(l);
        tallies.push(t);
    }
    Ok(CensusReport {
        census: aggregate(&labels, &tallies),
        labels,
        tallies,
    })
}

/// Folds labels and per-query tallies into census statistics.
pub fn aggregate(labels: &[ErrorLabel], tallies: &[QueryTally]) -> ErrorCensus {
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let total_queries = tallies.len();
    let affected = tallies.iter().filter(|t| t.confirmed > 0).count();
    let total_tokens: usize = tallies.iter().map(|t| t.tokens).sum();
    let confirmed = labels.iter().filter(|l| l.error_type.is_confirmed()).count();
    let flags = labels.len();
    let per_query_rate: f64 = tallies
        .iter()
        .map(|t| ratio(t.confirmed as f64, t.tokens as f64))
        .sum();
    let mut breakdown = BTreeMap::new();
    for ty in ErrorType::ALL {
        let n = labels.iter().filter(|l| l.error_type == ty).count();
        breakdown.insert(ty.as_str().to_string(), 100.0 * ratio(n as f64, flags as f64));
    }
    ErrorCensus {
        total_queries,
        queries_with_errors: affected,
        query_error_rate: ratio(affected as f64, total_queries as f64),
        token_error_rate: ratio(per_query_rate, total_queries as f64),
        pooled_token_error_rate: ratio(confirmed as f64, total_tokens as f64),
        avg_errors_per_query: ratio(confirmed as f64, total_queries as f64),
        avg_errors_per_affected_query: ratio(confirmed as f64, affected as f64),
        total_tokens,
        confirmed_errors: confirmed,
        oov_flags: flags,
        unmatched: flags - confirmed,
        unmatched_share: ratio((flags - confirmed) as f64, flags as f64),
        yield_ratio: (flags > 0).then(|| confirmed as f64 / flags as f64),
        breakdown,
    }
}

/// Confirmed spelling errors per OOV flag on a paired dataset.
pub fn yield_ratio(labels: &[ErrorLabel]) -> Result<f64, CensusError> {
    if labels.is_empty() {
        return Err(CensusError::NoFlags);
    }
    let confirmed = labels.iter().filter(|l| l.error_type.is_confirmed()).count();
    Ok(confirmed as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OovCensus {
    pub total_queries: usize,
    pub total_tokens: usize,
    pub oov_tokens: usize,
    pub oov_rate: f64,
    pub queries_with_oov: usize,
}

/// OOV proxy for query sets without paraphrases. Numeric tokens count
/// toward the total but are never OOV.
pub fn oov_census(queries: &[QueryRecord], vocab: &Vocabulary) -> Result<OovCensus, CensusError> {
    let mut total_tokens = 0;
    let mut oov_tokens = 0;
    let mut queries_with_oov = 0;
    for q in queries {
        let toks = tokenize(&q.original_text);
        let oov = toks
            .iter()
            .filter(|t| !t.numeric && !vocab.contains(&t.text))
            .count();
        total_tokens += toks.len();
        oov_tokens += oov;
        queries_with_oov += usize::from(oov > 0);
    }
    if total_tokens == 0 {
        return Err(CensusError::NoTokens);
    }
    Ok(OovCensus {
        total_queries: queries.len(),
        total_tokens,
        oov_tokens,
        oov_rate: oov_tokens as f64 / total_tokens as f64,
        queries_with_oov,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEstimate {
    pub oov_rate: f64,
    pub yield_ratio: f64,
    pub estimated_error_rate: f64,
}

pub fn calibrate(oov_rate: f64, yield_ratio: f64) -> Result<CalibrationEstimate, CensusError> {
    if !(yield_ratio > 0.0 && yield_ratio <= 1.0) {
        return Err(CensusError::InvalidYield(yield_ratio));
    }
    Ok(CalibrationEstimate {
        oov_rate,
        yield_ratio,
        estimated_error_rate: oov_rate * yield_ratio,
    })
}
