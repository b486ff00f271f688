//! Seeded synthetic corpora with injected query typos, for tests, benches and demos.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Judgment, Passage, QueryRecord};
use crate::harness::Datasets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub topics: usize,
    pub words_per_topic: usize,
    pub shared_words: usize,
    pub passages_per_topic: usize,
    pub passage_len: usize,
    pub queries: usize,
    pub query_len: usize,
    /// Probability that a query token receives one edit.
    pub typo_rate: f64,
}

impl SyntheticConfig {
    pub fn small() -> Self {
        SyntheticConfig {
            seed: 42,
            topics: 12,
            words_per_topic: 15,
            shared_words: 40,
            passages_per_topic: 8,
            passage_len: 30,
            queries: 40,
            query_len: 6,
            typo_rate: 0.15,
        }
    }

    /// Roughly the scale of the real passage pool's vocabulary.
    pub fn large() -> Self {
        SyntheticConfig {
            seed: 42,
            topics: 400,
            words_per_topic: 20,
            shared_words: 300,
            passages_per_topic: 10,
            passage_len: 60,
            queries: 500,
            query_len: 8,
            typo_rate: 0.1,
        }
    }
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self::small()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub queries: Vec<QueryRecord>,
    pub passages: Vec<Passage>,
    pub judgments: Vec<Judgment>,
}

const ONSETS: [&str; 16] = [
    "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "th", "st",
];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "y"];
const CODAS: [&str; 6] = ["", "n", "r", "s", "l", "x"];

fn make_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=4);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("nonempty"));
        w.push_str(VOWELS.choose(rng).expect("nonempty"));
        w.push_str(CODAS.choose(rng).expect("nonempty"));
    }
    w
}

fn typo(word: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let i = rng.gen_range(0..chars.len());
    let letter = (b'a' + rng.gen_range(0..26u8)) as char;
    match rng.gen_range(0..3) {
        0 => chars[i] = letter,
        1 => chars.insert(i, letter),
        _ if chars.len() > 3 => {
            chars.remove(i);
        }
        _ => chars.insert(i, letter),
    }
    chars.into_iter().collect()
}

impl SyntheticData {
    pub fn generate(cfg: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let total = cfg.topics * cfg.words_per_topic + cfg.shared_words;
        let mut seen = BTreeSet::new();
        let mut words = Vec::with_capacity(total);
        while words.len() < total {
            let w = make_word(&mut rng);
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
        let (shared, topical) = words.split_at(cfg.shared_words);
        let topics: Vec<&[String]> = topical.chunks(cfg.words_per_topic).collect();

        let mut passages = Vec::new();
        for (t, topic) in topics.iter().enumerate() {
            for j in 0..cfg.passages_per_topic {
                let text: Vec<&str> = (0..cfg.passage_len)
                    .map(|_| {
                        if rng.gen_bool(0.6) {
                            topic.choose(&mut rng).expect("nonempty").as_str()
                        } else {
                            shared.choose(&mut rng).expect("nonempty").as_str()
                        }
                    })
                    .collect();
                passages.push(Passage {
                    id: format!("p{t:04}_{j:02}"),
                    text: text.join(" "),
                    source: Some("synthetic".into()),
                });
            }
        }

        let mut queries = Vec::new();
        let mut judgments = Vec::new();
        for q in 0..cfg.queries {
            let t = rng.gen_range(0..topics.len());
            let clean: Vec<String> = (0..cfg.query_len)
                .map(|_| topics[t].choose(&mut rng).expect("nonempty").clone())
                .collect();
            let noisy: Vec<String> = clean
                .iter()
                .map(|w| {
                    if rng.gen_bool(cfg.typo_rate) {
                        typo(w, &mut rng)
                    } else {
                        w.clone()
                    }
                })
                .collect();
            let id = format!("q{q:04}");
            queries.push(QueryRecord {
                id: id.clone(),
                original_text: noisy.join(" "),
                paraphrase_text: Some(clean.join(" ")),
                summary: None,
            });
            for j in 0..cfg.passages_per_topic {
                let grade = match j % 4 {
                    0 => 4,
                    1 => 3,
                    2 => 2,
                    _ => 1,
                };
                judgments.push(Judgment {
                    query_id: id.clone(),
                    passage_id: format!("p{t:04}_{j:02}"),
                    grade,
                });
            }
        }
        SyntheticData {
            queries,
            passages,
            judgments,
        }
    }

    pub fn into_datasets(self) -> Datasets {
        Datasets {
            queries: self.queries,
            passages: self.passages,
            judgments: self.judgments,
        }
    }
}
