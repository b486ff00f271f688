//! The four correction policies, the per-type correction cache and the
//! confusable-pair guard.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_numeric_token, tokenize, Passage, Vocabulary};
use crate::edit::{closest_candidates, Candidate, CandidateOrder, CandidateSearch};
use crate::error::{CorrectionError, IndexError};
use crate::symspell::DeleteIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Conservative,
    EditDistance,
    ContextAware,
    Symspell,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Conservative,
        Method::EditDistance,
        Method::ContextAware,
        Method::Symspell,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Conservative => "conservative",
            Method::EditDistance => "edit_distance",
            Method::ContextAware => "context_aware",
            Method::Symspell => "symspell",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = CorrectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s || m.as_str().replace('_', "-") == s)
            .ok_or_else(|| CorrectionError::InvalidConfig(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectorConfig {
    pub method: Method,
    pub max_dist: usize,
    pub freq_threshold: u64,
    pub context_window: usize,
    /// Tokens with fewer chars are left alone; 0 disables the gate.
    pub min_token_len: usize,
    pub order: CandidateOrder,
}

impl CorrectorConfig {
    pub fn for_method(method: Method) -> Self {
        let (max_dist, freq_threshold) = match method {
            Method::Conservative => (1, 5),
            _ => (2, 0),
        };
        CorrectorConfig {
            method,
            max_dist,
            freq_threshold,
            context_window: 2,
            min_token_len: 0,
            order: CandidateOrder::default(),
        }
    }

    pub fn with_min_token_len(mut self, len: usize) -> Self {
        self.min_token_len = len;
        self
    }

    pub fn validate(&self) -> Result<(), CorrectionError> {
        let bad = |msg: String| Err(CorrectionError::InvalidConfig(msg));
        match self.method {
            Method::Conservative if (self.max_dist, self.freq_threshold) != (1, 5) => {
                bad("conservative requires max_dist=1 and freq_threshold=5".into())
            }
            Method::EditDistance | Method::ContextAware
                if (self.max_dist, self.freq_threshold) != (2, 0) =>
            {
                bad(format!(
                    "{} requires max_dist=2 and freq_threshold=0",
                    self.method
                ))
            }
            Method::ContextAware if self.context_window != 2 => {
                bad("context_aware requires context_window=2".into())
            }
            Method::Symspell if !(1..=2).contains(&self.max_dist) => {
                bad("symspell max_dist must be 1 or 2".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    InVocab,
    Numeric,
    TooShort,
    NoCandidate,
    BlacklistBlocked,
    Corrected,
}

/// The decision taken for one token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCorrection {
    pub original: String,
    pub corrected: String,
    pub changed: bool,
    pub distance: usize,
    pub candidate_freq: u64,
    pub reason: Reason,
}

impl TokenCorrection {
    fn keep(token: &str, reason: Reason, distance: usize, candidate_freq: u64) -> Self {
        TokenCorrection {
            original: token.to_string(),
            corrected: token.to_string(),
            changed: false,
            distance,
            candidate_freq,
            reason,
        }
    }
}

/// Unordered pairs of valid terms that must never be corrected into each other.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusablePairs {
    pairs: BTreeSet<(String, String)>,
}

impl ConfusablePairs {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(a: &str, b: &str) -> (String, String) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn insert(&mut self, a: &str, b: &str) {
        self.pairs.insert(Self::key(a, b));
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        !self.pairs.is_empty() && self.pairs.contains(&Self::key(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in sorted order, each with its smaller word first.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// One pair per line, two lowercase words separated by a tab.
    /// Blank lines and `#` comments are ignored.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, CorrectionError> {
        let mut out = ConfusablePairs::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: &str| CorrectionError::Blacklist {
                line: i + 1,
                message: message.to_string(),
            };
            let parts: Vec<&str> = trimmed.split('\t').collect();
            let [a, b] = parts.as_slice() else {
                return Err(err("expected two tab-separated words"));
            };
            for w in [a, b] {
                if w.is_empty() || w.chars().any(char::is_whitespace) {
                    return Err(err("words must be nonempty and contain no whitespace"));
                }
                if w.to_lowercase() != **w {
                    return Err(err("words must be lowercase"));
                }
            }
            out.insert(a, b);
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self, CorrectionError> {
        Self::parse(BufReader::new(File::open(path)?))
    }
}

/// Passage-level co-occurrence: for each word, the sorted passage indices containing it.
#[derive(Debug, Clone, Default)]
pub struct Cooccurrence {
    postings: HashMap<String, Vec<u32>>,
}

impl Cooccurrence {
    pub fn from_passages(passages: &[Passage]) -> Self {
        let mut postings: HashMap<String, Vec<u32>> = HashMap::new();
        for (i, p) in passages.iter().enumerate() {
            for tok in tokenize(&p.text) {
                let list = postings.entry(tok.text).or_default();
                if list.last() != Some(&(i as u32)) {
                    list.push(i as u32);
                }
            }
        }
        Cooccurrence { postings }
    }

    /// Number of passages containing both words.
    pub fn joint_count(&self, a: &str, b: &str) -> u64 {
        let (Some(x), Some(y)) = (self.postings.get(a), self.postings.get(b)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Sum over context tokens of the passages shared with `candidate`.
pub fn context_score(candidate: &str, context: &[String], cooccur: &Cooccurrence) -> u64 {
    context
        .iter()
        .map(|c| cooccur.joint_count(candidate, c))
        .sum()
}

/// Everything the correctors read, built once from the answer corpus.
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub vocab: Vocabulary,
    pub index: DeleteIndex,
    pub cooccur: Cooccurrence,
}

impl Lexicon {
    pub fn build(vocab: Vocabulary, passages: &[Passage]) -> Result<Self, IndexError> {
        let index = DeleteIndex::build(&vocab, 2)?;
        let cooccur = Cooccurrence::from_passages(passages);
        Ok(Lexicon {
            vocab,
            index,
            cooccur,
        })
    }
}

/// A token-level correction outcome for a whole text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectedText {
    pub text: String,
    pub corrections: Vec<TokenCorrection>,
}

impl CorrectedText {
    pub fn changes(&self) -> usize {
        self.corrections.iter().filter(|c| c.changed).count()
    }
}

pub struct Corrector<'a> {
    lexicon: &'a Lexicon,
    blacklist: &'a ConfusablePairs,
    config: CorrectorConfig,
}

impl<'a> Corrector<'a> {
    pub fn new(
        config: CorrectorConfig,
        lexicon: &'a Lexicon,
        blacklist: &'a ConfusablePairs,
    ) -> Result<Self, CorrectionError> {
        config.validate()?;
        if config.method == Method::Symspell && config.max_dist > lexicon.index.max_index_dist() {
            return Err(CorrectionError::InvalidConfig(
                "symspell max_dist exceeds index depth".into(),
            ));
        }
        Ok(Corrector {
            lexicon,
            blacklist,
            config,
        })
    }

    pub fn config(&self) -> &CorrectorConfig {
        &self.config
    }

    pub fn method(&self) -> Method {
        self.config.method
    }

    pub fn correct_token(&self, token: &str, context: &[String]) -> TokenCorrection {
        let vocab = &self.lexicon.vocab;
        if let Some(freq) = vocab.frequency(token) {
            return TokenCorrection::keep(token, Reason::InVocab, 0, freq);
        }
        if is_numeric_token(token) {
            return TokenCorrection::keep(token, Reason::Numeric, 0, 0);
        }
        if self.config.min_token_len > 0 && token.chars().count() < self.config.min_token_len {
            return TokenCorrection::keep(token, Reason::TooShort, 0, 0);
        }
        let Some(best) = self.best_candidate(token, context) else {
            return TokenCorrection::keep(token, Reason::NoCandidate, 0, 0);
        };
        if self.blacklist.contains(token, &best.word) {
            return TokenCorrection::keep(
                token,
                Reason::BlacklistBlocked,
                best.distance,
                best.frequency,
            );
        }
        TokenCorrection {
            original: token.to_string(),
            corrected: best.word,
            changed: true,
            distance: best.distance,
            candidate_freq: best.frequency,
            reason: Reason::Corrected,
        }
    }

    fn best_candidate(&self, token: &str, context: &[String]) -> Option<Candidate> {
        let cfg = &self.config;
        let search = CandidateSearch::new(cfg.max_dist).order(cfg.order);
        let mut candidates = match cfg.method {
            Method::Symspell => self
                .lexicon
                .index
                .lookup(token, cfg.max_dist)
                .expect("max_dist checked against index depth at construction"),
            _ => search.run(token, &self.lexicon.vocab),
        };
        candidates.retain(|c| c.frequency >= cfg.freq_threshold && c.word != token);
        if cfg.method == Method::ContextAware && candidates.len() > 1 {
            let best = candidates[0].distance;
            let tied = candidates.iter().take_while(|c| c.distance == best).count();
            if tied > 1 {
                let mut scored: Vec<(u64, Candidate)> = candidates
                    .drain(..tied)
                    .map(|c| (context_score(&c.word, context, &self.lexicon.cooccur), c))
                    .collect();
                scored.sort_by(|(sx, x), (sy, y)| sy.cmp(sx).then_with(|| cfg.order.compare(x, y)));
                return scored.into_iter().next().map(|(_, c)| c);
            }
        }
        candidates.into_iter().next()
    }

    /// Corrects each token against its window in the original token sequence
    /// and splices changed tokens back into their source spans.
    pub fn correct_text(&self, text: &str) -> CorrectedText {
        self.correct_text_with(text, |token, ctx| self.correct_token(token, ctx))
    }

    pub fn correct_text_cached(&self, text: &str, cache: &CorrectionCache) -> CorrectedText {
        self.correct_text_with(text, |token, ctx| {
            cache.get_or_insert_with(self.config.method, token, || self.correct_token(token, ctx))
        })
    }

    fn correct_text_with<F>(&self, text: &str, mut decide: F) -> CorrectedText
    where
        F: FnMut(&str, &[String]) -> TokenCorrection,
    {
        let tokens = tokenize(text);
        let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
        let mut out = String::with_capacity(text.len());
        let mut last = 0;
        let mut corrections = Vec::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            let context = window(&words, i, self.config.context_window);
            let tc = decide(&tok.text, &context);
            out.push_str(&text[last..tok.start]);
            if tc.changed {
                out.push_str(&tc.corrected);
            } else {
                out.push_str(&text[tok.start..tok.end]);
            }
            last = tok.end;
            corrections.push(tc);
        }
        out.push_str(&text[last..]);
        CorrectedText {
            text: out,
            corrections,
        }
    }

    /// Computes the correction of every word type in `texts`, each once, using
    /// the context of its first occurrence.
    pub fn build_cache<'t, I>(&self, texts: I) -> CorrectionCache
    where
        I: IntoIterator<Item = &'t str>,
    {
        let cache = CorrectionCache::new();
        self.extend_cache(&cache, texts);
        cache
    }

    pub fn extend_cache<'t, I>(&self, cache: &CorrectionCache, texts: I)
    where
        I: IntoIterator<Item = &'t str>,
    {
        let mut first_seen: Vec<(String, Vec<String>)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for text in texts {
            let words: Vec<String> = tokenize(text).into_iter().map(|t| t.text).collect();
            for (i, w) in words.iter().enumerate() {
                if !cache.contains(self.config.method, w) && seen.insert(w.clone()) {
                    first_seen.push((w.clone(), window(&words, i, self.config.context_window)));
                }
            }
        }
        let computed: Vec<TokenCorrection> = first_seen
            .par_iter()
            .map(|(w, ctx)| self.correct_token(w, ctx))
            .collect();
        for tc in computed {
            let word = tc.original.clone();
            cache.get_or_insert_with(self.config.method, &word, || tc);
        }
    }
}

fn window(words: &[String], i: usize, radius: usize) -> Vec<String> {
    let lo = i.saturating_sub(radius);
    let hi = (i + radius + 1).min(words.len());
    (lo..hi).filter(|&j| j != i).map(|j| words[j].clone()).collect()
}

/// Memoized corrections keyed by (method, word type). The first record
/// stored for a key wins; later inserts for it are ignored.
#[derive(Debug, Default)]
pub struct CorrectionCache {
    entries: RwLock<HashMap<(Method, String), TokenCorrection>>,
}

impl CorrectionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, method: Method, word: &str) -> Option<TokenCorrection> {
        self.entries
            .read()
            .expect("cache lock poisoned")
            .get(&(method, word.to_string()))
            .cloned()
    }

    pub fn contains(&self, method: Method, word: &str) -> bool {
        self.get(method, word).is_some()
    }

    pub fn get_or_insert_with<F>(&self, method: Method, word: &str, compute: F) -> TokenCorrection
    where
        F: FnOnce() -> TokenCorrection,
    {
        if let Some(hit) = self.get(method, word) {
            return hit;
        }
        let fresh = compute();
        self.entries
            .write()
            .expect("cache lock poisoned")
            .entry((method, word.to_string()))
            .or_insert(fresh)
            .clone()
    }

    pub fn type_count(&self) -> usize {
        self.entries.read().expect("cache lock poisoned").len()
    }

    pub fn type_count_for(&self, method: Method) -> usize {
        self.entries
            .read()
            .expect("cache lock poisoned")
            .keys()
            .filter(|(m, _)| *m == method)
            .count()
    }

    /// Entries for one method sorted by word.
    pub fn snapshot(&self, method: Method) -> Vec<TokenCorrection> {
        let mut out: Vec<TokenCorrection> = self
            .entries
            .read()
            .expect("cache lock poisoned")
            .iter()
            .filter(|((m, _), _)| *m == method)
            .map(|(_, tc)| tc.clone())
            .collect();
        out.sort_by(|a, b| a.original.cmp(&b.original));
        out
    }
}

/// Convenience for one-off lookups outside a [`Corrector`].
pub fn nearest(token: &str, vocab: &Vocabulary, max_dist: usize) -> Option<Candidate> {
    closest_candidates(token, vocab, max_dist).into_iter().next()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use proptest::prelude::*;

    fn passage(i: usize, text: &str) -> Passage {
        Passage {
            id: format!("p{i}"),
            text: text.into(),
            source: None,
        }
    }

    fn lexicon_from_counts(words: &[(&str, u64)]) -> Lexicon {
        let vocab =
            Vocabulary::from_counts(words.iter().map(|(w, c)| (w.to_string(), *c)), 1).unwrap();
        Lexicon::build(vocab, &[]).unwrap()
    }

    fn corrector<'a>(m: Method, lex: &'a Lexicon, bl: &'a ConfusablePairs) -> Corrector<'a> {
        Corrector::new(CorrectorConfig::for_method(m), lex, bl).unwrap()
    }

    #[test]
    fn config_invariants() {
        for m in Method::ALL {
            CorrectorConfig::for_method(m).validate().unwrap();
        }
        let mut c = CorrectorConfig::for_method(Method::Conservative);
        c.max_dist = 2;
        assert!(c.validate().is_err());
        let mut c = CorrectorConfig::for_method(Method::ContextAware);
        c.context_window = 3;
        assert!(c.validate().is_err());
        assert_eq!("edit-distance".parse::<Method>().unwrap(), Method::EditDistance);
        assert!("llm".parse::<Method>().is_err());
    }

    #[test]
    fn hydralazine_conservative() {
        let lex = lexicon_from_counts(&[("hydralazine", 7), ("blood", 40)]);
        let bl = ConfusablePairs::new();
        let tc = corrector(Method::Conservative, &lex, &bl).correct_token("hydrslazine", &[]);
        assert!(tc.changed);
        assert_eq!(tc.corrected, "hydralazine");
        assert_eq!(tc.distance, 1);
        assert_eq!(tc.reason, Reason::Corrected);
    }

    #[test]
    fn conservative_frequency_gate() {
        let lex = lexicon_from_counts(&[("hydralazine", 4)]);
        let bl = ConfusablePairs::new();
        let tc = corrector(Method::Conservative, &lex, &bl).correct_token("hydrslazine", &[]);
        assert_eq!(tc.reason, Reason::NoCandidate);
        let tc = corrector(Method::EditDistance, &lex, &bl).correct_token("hydrslazine", &[]);
        assert!(tc.changed);
    }

    #[test]
    fn in_vocab_numeric_short() {
        let lex = lexicon_from_counts(&[("tablets", 9), ("mg", 9)]);
        let bl = ConfusablePairs::new();
        for m in Method::ALL {
            let c = corrector(m, &lex, &bl);
            assert_eq!(c.correct_token("tablets", &[]).reason, Reason::InVocab);
            assert_eq!(c.correct_token("5mg", &[]).reason, Reason::Numeric);
        }
        let cfg = CorrectorConfig::for_method(Method::EditDistance).with_min_token_len(5);
        let c = Corrector::new(cfg, &lex, &bl).unwrap();
        assert_eq!(c.correct_token("mgg", &[]).reason, Reason::TooShort);
    }

    #[test]
    fn son_to_do_split() {
        // "do" sits at distance 2 from "son"; nothing at distance 1
        let lex = lexicon_from_counts(&[("do", 50), ("tablets", 9)]);
        assert_eq!(nearest("son", &lex.vocab, 2).unwrap().distance, 2);
        let bl = ConfusablePairs::new();
        let ed = corrector(Method::EditDistance, &lex, &bl).correct_token("son", &[]);
        assert!(ed.changed);
        assert_eq!(ed.corrected, "do");
        let cons = corrector(Method::Conservative, &lex, &bl).correct_token("son", &[]);
        assert!(!cons.changed);
        assert_eq!(cons.reason, Reason::NoCandidate);
    }

    #[test]
    fn blacklist_blocks() {
        let lex = lexicon_from_counts(&[("hypotension", 20), ("ilium", 20)]);
        let mut bl = ConfusablePairs::new();
        bl.insert("hypotension", "hypertension");
        bl.insert("ileum", "ilium");
        for m in Method::ALL {
            let tc = corrector(m, &lex, &bl).correct_token("ileum", &[]);
            assert!(!tc.changed, "{m}");
            assert_eq!(tc.reason, Reason::BlacklistBlocked, "{m}");
            let tc = corrector(m, &lex, &bl).correct_token("hypertension", &[]);
            assert!(!tc.changed, "{m}");
        }
        let ed = corrector(Method::EditDistance, &lex, &bl).correct_token("hypertension", &[]);
        assert_eq!(ed.reason, Reason::BlacklistBlocked);
    }

    #[test]
    fn blacklist_file_format() {
        let text = "# confusables\nhypertension\thypotension\n\nileum\tilium\n";
        let bl = ConfusablePairs::parse(text.as_bytes()).unwrap();
        assert_eq!(bl.len(), 2);
        assert!(bl.contains("ilium", "ileum"));
        assert!(ConfusablePairs::parse("a b\n".as_bytes()).is_err());
        assert!(ConfusablePairs::parse("Ileum\tilium\n".as_bytes()).is_err());
    }

    #[test]
    fn shipped_blacklist_parses() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/confusable_pairs.tsv");
        let bl = ConfusablePairs::load(&path).unwrap();
        assert!(bl.contains("hypertension", "hypotension"));
        assert!(bl.contains("hydralazine", "hydroxyzine"));
    }

    #[test]
    fn correct_text_examples() {
        let lex = lexicon_from_counts(&[("zolmitriptan", 5), ("tablets", 9)]);
        let bl = ConfusablePairs::new();
        let c = corrector(Method::EditDistance, &lex, &bl);
        let out = c.correct_text("zolmitriptan tabkets 5mg");
        assert_eq!(out.text, "zolmitriptan tablets 5mg");
        assert_eq!(out.changes(), 1);
        let out = c.correct_text("Zolmitriptan, TABLETS!");
        assert_eq!(out.text, "Zolmitriptan, TABLETS!");
        assert_eq!(out.changes(), 0);
        // untouched bytes and casing survive, corrected token goes in lowercase
        let out = c.correct_text("  Zolmitriptan  Tabkets?");
        assert_eq!(out.text, "  Zolmitriptan  tablets?");
    }

    #[test]
    fn context_score_examples() {
        let ps: Vec<Passage> = ["a x", "a x y", "a x", "b"]
            .iter()
            .enumerate()
            .map(|(i, t)| passage(i, t))
            .collect();
        let co = Cooccurrence::from_passages(&ps);
        assert_eq!(context_score("a", &[], &co), 0);
        assert_eq!(context_score("a", &["x".to_string()], &co), 3);
        assert_eq!(context_score("a", &["b".to_string(), "zz".to_string()], &co), 0);
    }

    #[test]
    fn context_breaks_distance_ties() {
        // "bone" and "cone" are both one edit from "hone"; "cone" is more frequent
        let ps: Vec<Passage> = ["bone marrow", "bone marrow", "cone cells", "cone cells", "cone cells"]
            .iter()
            .enumerate()
            .map(|(i, t)| passage(i, t))
            .collect();
        let vocab = crate::corpus::build_vocabulary(&ps, 1).unwrap();
        let lex = Lexicon::build(vocab, &ps).unwrap();
        let bl = ConfusablePairs::new();
        let ed = corrector(Method::EditDistance, &lex, &bl);
        let ca = corrector(Method::ContextAware, &lex, &bl);
        assert_eq!(ed.correct_text("hone marrow").text, "cone marrow");
        assert_eq!(ca.correct_text("hone marrow").text, "bone marrow");
        assert_eq!(ca.correct_text("hone cells").text, "cone cells");
    }

    #[test]
    fn cache_examples() {
        let lex = lexicon_from_counts(&[("tablets", 9)]);
        let bl = ConfusablePairs::new();
        let c = corrector(Method::EditDistance, &lex, &bl);
        let cache = c.build_cache(["tabkets tablets"]);
        assert_eq!(cache.type_count(), 2);
        let snap = cache.snapshot(Method::EditDistance);
        assert_eq!(snap.iter().filter(|t| t.changed).count(), 1);
        c.extend_cache(&cache, ["tabkets tablets"]);
        assert_eq!(cache.snapshot(Method::EditDistance), snap);
        let again = c.build_cache(["tabkets tablets"]);
        assert_eq!(again.snapshot(Method::EditDistance), snap);
        assert_eq!(
            c.correct_text_cached("tabkets", &cache),
            c.correct_text("tabkets")
        );
    }

    fn micro_lexicon(texts: &[String]) -> (Vec<Passage>, Lexicon) {
        let ps: Vec<Passage> = texts.iter().enumerate().map(|(i, t)| passage(i, t)).collect();
        let vocab = crate::corpus::build_vocabulary(&ps, 1).unwrap();
        let lex = Lexicon::build(vocab, &ps).unwrap();
        (ps, lex)
    }

    proptest! {
        #[test]
        fn context_score_matches_passage_scan(
            texts in proptest::collection::vec("[abc]( [abcd]){0,5}", 1..8),
            cand in "[abcd]",
            ctx in proptest::collection::vec("[abcde]", 0..4),
        ) {
            let ps: Vec<Passage> = texts.iter().enumerate().map(|(i, t)| passage(i, t)).collect();
            let co = Cooccurrence::from_passages(&ps);
            let mut expect = 0u64;
            for c in &ctx {
                for p in &ps {
                    let toks = crate::corpus::tokenize_words(&p.text);
                    if toks.contains(&cand) && toks.contains(c) {
                        expect += 1;
                    }
                }
            }
            prop_assert_eq!(context_score(&cand, &ctx, &co), expect);
        }

        #[test]
        fn method_monotonicity(
            corpus in proptest::collection::vec("[a-e]{2,5}( [a-e]{2,5}){0,6}", 2..10),
            query in "[a-f]{1,6}( [a-f]{1,6}){0,4}",
        ) {
            let (_, lex) = micro_lexicon(&corpus);
            let bl = ConfusablePairs::new();
            let changed = |m: Method| -> Vec<bool> {
                corrector(m, &lex, &bl).correct_text(&query).corrections.iter().map(|c| c.changed).collect()
            };
            let cons = changed(Method::Conservative);
            let ed = changed(Method::EditDistance);
            let sym = changed(Method::Symspell);
            for i in 0..ed.len() {
                prop_assert!(!cons[i] || ed[i]);
                prop_assert!(!sym[i] || ed[i]);
            }
            // cache agrees with direct computation
            let c = corrector(Method::EditDistance, &lex, &bl);
            let cache = c.build_cache([query.as_str()]);
            prop_assert_eq!(c.correct_text_cached(&query, &cache), c.correct_text(&query));
        }
    }
}
