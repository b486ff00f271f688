//! Delete-variant index for approximate lookup.
//!
//! Every vocabulary word is indexed under each string obtained by deleting up
//! to `max_index_dist` of its characters. A lookup generates the token's own
//! deletes, collects the words stored under any of them, and keeps those whose
//! true Levenshtein distance is within bounds.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::edit::{closest_candidates, levenshtein_within, Candidate, CandidateOrder};
use crate::error::IndexError;

/// All distinct strings reachable by deleting at most `depth` chars, `word` included.
pub fn delete_variants(word: &str, depth: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_deletes(word, depth, &mut out);
    out
}

fn collect_deletes<S: SetLike>(word: &str, depth: usize, out: &mut S) {
    let mut frontier = vec![word.to_string()];
    out.insert_new(word);
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &frontier {
            let chars: Vec<(usize, char)> = w.char_indices().collect();
            for &(i, c) in &chars {
                let mut v = String::with_capacity(w.len());
                v.push_str(&w[..i]);
                v.push_str(&w[i + c.len_utf8()..]);
                if out.insert_new(&v) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
}

trait SetLike {
    fn insert_new(&mut self, v: &str) -> bool;
}

impl SetLike for BTreeSet<String> {
    fn insert_new(&mut self, v: &str) -> bool {
        !self.contains(v) && self.insert(v.to_string())
    }
}

impl SetLike for HashSet<String> {
    fn insert_new(&mut self, v: &str) -> bool {
        !self.contains(v) && self.insert(v.to_string())
    }
}

#[derive(Debug, Clone)]
pub struct DeleteIndex {
    table: HashMap<String, Vec<String>>,
    frequencies: HashMap<String, u64>,
    max_index_dist: usize,
    fingerprint: String,
    order: CandidateOrder,
}

#[derive(Serialize, Deserialize)]
struct StoredIndex {
    max_index_dist: usize,
    fingerprint: String,
    table: BTreeMap<String, Vec<String>>,
}

impl DeleteIndex {
    pub fn build(vocab: &Vocabulary, max_index_dist: usize) -> Result<Self, IndexError> {
        if !(1..=2).contains(&max_index_dist) {
            return Err(IndexError::InvalidDepth(max_index_dist));
        }
        let mut table: HashMap<String, Vec<String>> = HashMap::new();
        let mut frequencies = HashMap::with_capacity(vocab.total_types());
        let mut variants = HashSet::new();
        // vocab iterates sorted, so every posting list comes out sorted
        for (word, freq) in vocab.iter() {
            frequencies.insert(word.to_string(), freq);
            variants.clear();
            collect_deletes(word, max_index_dist, &mut variants);
            for v in variants.drain() {
                table.entry(v).or_default().push(word.to_string());
            }
        }
        Ok(DeleteIndex {
            table,
            frequencies,
            max_index_dist,
            fingerprint: vocab.fingerprint(),
            order: CandidateOrder::default(),
        })
    }

    pub fn with_order(mut self, order: CandidateOrder) -> Self {
        self.order = order;
        self
    }

    pub fn max_index_dist(&self) -> usize {
        self.max_index_dist
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Words stored under one delete-variant key.
    pub fn words_for(&self, key: &str) -> &[String] {
        self.table.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.table.keys().map(String::as_str)
    }

    /// Candidates within `max_dist`, verified by true Levenshtein distance.
    /// The token itself is returned at distance 0 when it is indexed.
    pub fn lookup(&self, token: &str, max_dist: usize) -> Result<Vec<Candidate>, IndexError> {
        if max_dist > self.max_index_dist {
            return Err(IndexError::DepthExceeded {
                requested: max_dist,
                depth: self.max_index_dist,
            });
        }
        let mut seen: HashSet<&str> = HashSet::new();
        let mut out = Vec::new();
        for variant in delete_variants(token, max_dist) {
            for word in self.words_for(&variant) {
                if !seen.insert(word.as_str()) {
                    continue;
                }
                if let Some(distance) = levenshtein_within(token, word, max_dist) {
                    out.push(Candidate {
                        word: word.clone(),
                        distance,
                        frequency: self.frequencies[word],
                    });
                }
            }
        }
        self.order.sort(&mut out);
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let stored = StoredIndex {
            max_index_dist: self.max_index_dist,
            fingerprint: self.fingerprint.clone(),
            table: self
                .table
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        };
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(w, &stored)?;
        Ok(())
    }

    /// Loads an index and checks it was built from `vocab`.
    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self, IndexError> {
        let stored: StoredIndex = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        let actual = vocab.fingerprint();
        if stored.fingerprint != actual {
            return Err(IndexError::FingerprintMismatch {
                expected: stored.fingerprint,
                actual,
            });
        }
        Ok(DeleteIndex {
            table: stored.table.into_iter().collect(),
            frequencies: vocab.iter().map(|(w, c)| (w.to_string(), c)).collect(),
            max_index_dist: stored.max_index_dist,
            fingerprint: stored.fingerprint,
            order: CandidateOrder::default(),
        })
    }
}

/// Words the linear scan finds within `max_dist` that the delete meet does not.
pub fn delete_meet_misses(
    token: &str,
    index: &DeleteIndex,
    vocab: &Vocabulary,
    max_dist: usize,
) -> Result<Vec<Candidate>, IndexError> {
    let found: HashSet<String> = index
        .lookup(token, max_dist)?
        .into_iter()
        .map(|c| c.word)
        .collect();
    let misses: Vec<Candidate> = closest_candidates(token, vocab, max_dist)
        .into_iter()
        .filter(|c| !found.contains(&c.word))
        .collect();
    if !misses.is_empty() {
        log::debug!("delete meet missed {} candidates for `{token}`", misses.len());
    }
    Ok(misses)
}
