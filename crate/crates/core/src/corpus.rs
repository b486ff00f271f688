//! Canonical data model, JSONL ingestion, tokenization and the domain vocabulary.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::DatasetError;

/// A user query, optionally paired with an assessor-written paraphrase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub id: String,
    #[serde(rename = "original")]
    pub original_text: String,
    #[serde(rename = "paraphrase", default)]
    pub paraphrase_text: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub source: Option<String>,
}

/// Graded relevance of one passage for one query: 1 incorrect, 2 related,
/// 3 incomplete, 4 excellent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub query_id: String,
    pub passage_id: String,
    pub grade: u8,
}

/// A record type that can be read from a canonical JSONL file.
pub trait Record: Serialize + DeserializeOwned {
    /// Checks type invariants, returning the offending field and a message.
    fn validate(&self) -> Result<(), (&'static str, String)>;
    /// Uniqueness key within a dataset.
    fn key(&self) -> String;
}

fn require_nonempty(field: &'static str, value: &str) -> Result<(), (&'static str, String)> {
    if value.trim().is_empty() {
        Err((field, "must be nonempty".to_string()))
    } else {
        Ok(())
    }
}

impl Record for QueryRecord {
    fn validate(&self) -> Result<(), (&'static str, String)> {
        require_nonempty("id", &self.id)?;
        require_nonempty("original", &self.original_text)
    }

    fn key(&self) -> String {
        self.id.clone()
    }
}

impl Record for Passage {
    fn validate(&self) -> Result<(), (&'static str, String)> {
        require_nonempty("id", &self.id)?;
        require_nonempty("text", &self.text)
    }

    fn key(&self) -> String {
        self.id.clone()
    }
}

impl Record for Judgment {
    fn validate(&self) -> Result<(), (&'static str, String)> {
        require_nonempty("query_id", &self.query_id)?;
        require_nonempty("passage_id", &self.passage_id)?;
        if !(1..=4).contains(&self.grade) {
            return Err(("grade", format!("{} is outside 1..=4", self.grade)));
        }
        Ok(())
    }

    fn key(&self) -> String {
        format!("{}/{}", self.query_id, self.passage_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Queries,
    Passages,
    Judgments,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dataset {
    Queries(Vec<QueryRecord>),
    Passages(Vec<Passage>),
    Judgments(Vec<Judgment>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Queries(v) => v.len(),
            Dataset::Passages(v) => v.len(),
            Dataset::Judgments(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn load_dataset(path: &Path, kind: DatasetKind) -> Result<Dataset, DatasetError> {
    Ok(match kind {
        DatasetKind::Queries => Dataset::Queries(load_jsonl(path)?),
        DatasetKind::Passages => Dataset::Passages(load_jsonl(path)?),
        DatasetKind::Judgments => Dataset::Judgments(load_jsonl(path)?),
    })
}

/// Reads and validates a JSONL file. Blank lines are skipped.
pub fn load_jsonl<T: Record>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_jsonl(BufReader::new(file))
}

pub fn read_jsonl<T: Record, R: BufRead>(reader: R) -> Result<Vec<T>, DatasetError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| DatasetError::Io {
            path: format!("line {line_no}"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| DatasetError::Malformed {
            line: line_no,
            field: field_from_serde(&e),
            message: e.to_string(),
        })?;
        record
            .validate()
            .map_err(|(field, message)| DatasetError::Malformed {
                line: line_no,
                field: field.to_string(),
                message,
            })?;
        let key = record.key();
        if !seen.insert(key.clone()) {
            return Err(DatasetError::Duplicate { id: key, line: line_no });
        }
        out.push(record);
    }
    Ok(out)
}

// serde_json reports missing/unknown fields as "missing field `x`"; pull the name out.
fn field_from_serde(err: &serde_json::Error) -> String {
    let msg = err.to_string();
    msg.split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<record>".to_string())
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut writer: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn save_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<(), DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_jsonl(records, BufWriter::new(file)).map_err(io_err)
}

/// One token with the byte span it occupies in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    /// Contains at least one digit; never altered by correctors.
    pub numeric: bool,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits on every non-alphanumeric character, then NFC-normalizes and
/// lowercases each piece. Combining marks stay attached to the token they follow.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        let inside = start.is_some();
        if is_word_char(c) || (inside && is_combining_mark(c)) {
            if !inside {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            push_token(&mut tokens, text, s, i);
        }
    }
    if let Some(s) = start {
        push_token(&mut tokens, text, s, text.len());
    }
    tokens
}

fn push_token(tokens: &mut Vec<Token>, text: &str, start: usize, end: usize) {
    let raw = &text[start..end];
    let normalized: String = raw.nfc().collect::<String>().to_lowercase();
    let normalized: String = normalized.nfc().collect();
    let numeric = normalized.chars().any(|c| c.is_numeric());
    tokens.push(Token {
        text: normalized,
        start,
        end,
        numeric,
    });
}

/// Token strings only.
pub fn tokenize_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.text).collect()
}

pub fn is_numeric_token(token: &str) -> bool {
    token.chars().any(|c| c.is_numeric())
}

/// Word to corpus frequency, keeping only words seen at least `min_freq` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    entries: BTreeMap<String, u64>,
    min_freq: u64,
}

impl Vocabulary {
    /// Builds from raw counts, dropping entries below `min_freq`.
    pub fn from_counts<I>(counts: I, min_freq: u64) -> Result<Self, DatasetError>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        if min_freq == 0 {
            return Err(DatasetError::InvalidParameter(
                "min_freq must be at least 1".into(),
            ));
        }
        let mut entries = BTreeMap::new();
        for (w, c) in counts {
            *entries.entry(w).or_insert(0) += c;
        }
        entries.retain(|_, c| *c >= min_freq);
        Ok(Vocabulary { entries, min_freq })
    }

    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.entries.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn min_freq(&self) -> u64 {
        self.min_freq
    }

    pub fn total_types(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, c)| (w.as_str(), *c))
    }

    /// SHA-256 over the sorted entries and the frequency floor.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.min_freq.to_le_bytes());
        for (w, c) in &self.entries {
            h.update(w.as_bytes());
            h.update([0u8]);
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

pub fn count_tokens<'a, I>(texts: I) -> BTreeMap<String, u64>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = BTreeMap::new();
    for text in texts {
        for tok in tokenize(text) {
            *counts.entry(tok.text).or_insert(0) += 1;
        }
    }
    counts
}

pub fn build_vocabulary(passages: &[Passage], min_freq: u64) -> Result<Vocabulary, DatasetError> {
    let counts = count_tokens(passages.iter().map(|p| p.text.as_str()));
    Vocabulary::from_counts(counts, min_freq)
}

/// Content hash over passage ids and texts, used to key cached artifacts.
pub fn corpus_hash(passages: &[Passage]) -> String {
    let mut h = Sha256::new();
    for p in passages {
        h.update(p.id.as_bytes());
        h.update([0u8]);
        h.update(p.text.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}
