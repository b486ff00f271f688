//! Levenshtein distance and linear-scan candidate search over a [`Vocabulary`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;

/// Plain Levenshtein distance (insert, delete, substitute; unit costs) over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    if a.is_ascii() && b.is_ascii() {
        full_distance(a.as_bytes(), b.as_bytes())
    } else {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        full_distance(&a, &b)
    }
}

/// Distance if it is at most `max`, otherwise `None`. Runs a banded
/// program that stops as soon as a whole row exceeds `max`.
pub fn levenshtein_within(a: &str, b: &str, max: usize) -> Option<usize> {
    if a.is_ascii() && b.is_ascii() {
        bounded_distance(a.as_bytes(), b.as_bytes(), max)
    } else {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        bounded_distance(&a, &b, max)
    }
}

fn full_distance<T: Eq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn bounded_distance<T: Eq>(a: &[T], b: &[T], max: usize) -> Option<usize> {
    let (n, m) = (a.len(), b.len());
    if n.abs_diff(m) > max {
        return None;
    }
    if n == 0 || m == 0 {
        return Some(n.max(m));
    }
    let big = max + 1;
    let mut prev: Vec<usize> = (0..=m).map(|j| if j <= max { j } else { big }).collect();
    let mut cur = vec![big; m + 1];
    for i in 1..=n {
        cur.fill(big);
        cur[0] = if i <= max { i } else { big };
        let lo = i.saturating_sub(max).max(1);
        let hi = (i + max).min(m);
        let mut row_min = cur[0];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(big);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (prev[m] <= max).then_some(prev[m])
}

/// A vocabulary word close to a query token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Candidate {
    pub word: String,
    pub distance: usize,
    pub frequency: u64,
}

/// How equal-distance candidates are ordered by corpus frequency.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrder {
    #[default]
    PreferFrequent,
    PreferRare,
}

impl CandidateOrder {
    /// Total order: distance ascending, then frequency, then word ascending.
    pub fn compare(self, x: &Candidate, y: &Candidate) -> Ordering {
        let freq = match self {
            CandidateOrder::PreferFrequent => y.frequency.cmp(&x.frequency),
            CandidateOrder::PreferRare => x.frequency.cmp(&y.frequency),
        };
        x.distance
            .cmp(&y.distance)
            .then(freq)
            .then_with(|| x.word.cmp(&y.word))
    }

    pub fn sort(self, candidates: &mut [Candidate]) {
        candidates.sort_by(|x, y| self.compare(x, y));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateSearch {
    pub max_dist: usize,
    pub include_self: bool,
    pub order: CandidateOrder,
}

impl CandidateSearch {
    pub fn new(max_dist: usize) -> Self {
        CandidateSearch {
            max_dist,
            include_self: false,
            order: CandidateOrder::default(),
        }
    }

    pub fn include_self(mut self, yes: bool) -> Self {
        self.include_self = yes;
        self
    }

    pub fn order(mut self, order: CandidateOrder) -> Self {
        self.order = order;
        self
    }

    pub fn run(&self, token: &str, vocab: &Vocabulary) -> Vec<Candidate> {
        scan(token, vocab, self, true)
    }
}

/// Every vocabulary word within `max_dist` of `token`, excluding the token itself.
pub fn closest_candidates(token: &str, vocab: &Vocabulary, max_dist: usize) -> Vec<Candidate> {
    CandidateSearch::new(max_dist).run(token, vocab)
}

pub(crate) fn scan(
    token: &str,
    vocab: &Vocabulary,
    search: &CandidateSearch,
    prune: bool,
) -> Vec<Candidate> {
    let token_len = token.chars().count();
    let mut out = Vec::new();
    for (word, frequency) in vocab.iter() {
        if !search.include_self && word == token {
            continue;
        }
        if prune && word.chars().count().abs_diff(token_len) > search.max_dist {
            continue;
        }
        if let Some(distance) = levenshtein_within(token, word, search.max_dist) {
            out.push(Candidate {
                word: word.to_string(),
                distance,
                frequency,
            });
        }
    }
    search.order.sort(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Exponential recursion straight from the definition.
    fn naive(a: &[u8], b: &[u8]) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let cost = usize::from(a[0] != b[0]);
        (naive(&a[1..], &b[1..]) + cost)
            .min(naive(&a[1..], b) + 1)
            .min(naive(a, &b[1..]) + 1)
    }

    fn vocab(words: &[(&str, u64)]) -> Vocabulary {
        Vocabulary::from_counts(words.iter().map(|(w, c)| (w.to_string(), *c)), 1).unwrap()
    }

    #[test]
    fn known_pairs_and_trivia() {
        assert_eq!(levenshtein("tabkets", "tablets"), 1);
        assert_eq!(levenshtein("x", "x"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("son", "do"), 2);
        assert_eq!(levenshtein("hydrslazine", "hydralazine"), 1);
        assert_eq!(levenshtein("naïve", "naive"), 1);
    }

    #[test]
    fn exhaustive_short_strings_match_recursion() {
        let mut words = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..4 {
            let mut next = Vec::new();
            for w in &frontier {
                for c in ['a', 'b', 'c'] {
                    next.push(format!("{w}{c}"));
                }
            }
            words.extend(next.iter().cloned());
            frontier = next;
        }
        for a in &words {
            for b in &words {
                let expect = naive(a.as_bytes(), b.as_bytes());
                assert_eq!(levenshtein(a, b), expect, "{a} {b}");
                for k in 0..3 {
                    let got = levenshtein_within(a, b, k);
                    assert_eq!(got, (expect <= k).then_some(expect), "{a} {b} {k}");
                }
            }
        }
    }

    #[test]
    fn finds_hydralazine_first() {
        let v = vocab(&[("hydralazine", 12), ("hydroxyzine", 30), ("tablets", 9)]);
        let c = closest_candidates("hydrslazine", &v, 2);
        assert_eq!(c[0].word, "hydralazine");
        assert_eq!(c[0].distance, 1);
        assert_eq!(c[0].frequency, 12);
    }

    #[test]
    fn self_exclusion() {
        let v = vocab(&[("cat", 5), ("bat", 3), ("cart", 1)]);
        let c = closest_candidates("cat", &v, 1);
        assert!(c.iter().all(|c| c.word != "cat"));
        assert_eq!(c.len(), 2);
        let with_self = CandidateSearch::new(1).include_self(true).run("cat", &v);
        assert_eq!(with_self[0].word, "cat");
        assert_eq!(with_self[0].distance, 0);
    }

    #[test]
    fn ordering_rule() {
        let v = vocab(&[("bat", 3), ("hat", 9), ("fat", 3), ("carts", 100)]);
        let c = closest_candidates("cat", &v, 2);
        let words: Vec<_> = c.iter().map(|c| c.word.as_str()).collect();
        assert_eq!(words, vec!["hat", "bat", "fat", "carts"]);
        let rare = CandidateSearch::new(2)
            .order(CandidateOrder::PreferRare)
            .run("cat", &v);
        let words: Vec<_> = rare.iter().map(|c| c.word.as_str()).collect();
        assert_eq!(words, vec!["bat", "fat", "hat", "carts"]);
    }

    proptest! {
        #[test]
        fn metric_axioms(a in "[a-d]{0,8}", b in "[a-d]{0,8}", c in "[a-d]{0,8}") {
            let ab = levenshtein(&a, &b);
            prop_assert_eq!(ab, levenshtein(&b, &a));
            prop_assert_eq!(ab == 0, a == b);
            prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        }

        #[test]
        fn bounded_matches_full(a in "[a-cé]{0,10}", b in "[a-cé]{0,10}", k in 0usize..4) {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(levenshtein_within(&a, &b, k), (d <= k).then_some(d));
        }

        #[test]
        fn scan_matches_oracle_and_pruning(
            words in proptest::collection::btree_map("[a-e]{1,7}", 1u64..20, 1..60),
            token in "[a-e]{1,7}",
            max_dist in 1usize..3,
        ) {
            let v = Vocabulary::from_counts(words.clone(), 1).unwrap();
            let search = CandidateSearch::new(max_dist);
            let pruned = scan(&token, &v, &search, true);
            let unpruned = scan(&token, &v, &search, false);
            prop_assert_eq!(&pruned, &unpruned);
            let mut expect: Vec<&String> = words.keys()
                .filter(|w| **w != token && levenshtein(&token, w) <= max_dist)
                .collect();
            expect.sort();
            let mut got: Vec<&String> = pruned.iter().map(|c| &c.word).collect();
            got.sort();
            prop_assert_eq!(got, expect);
            for w in pruned.windows(2) {
                prop_assert_eq!(search.order.compare(&w[0], &w[1]), Ordering::Less);
            }
        }
    }
}
