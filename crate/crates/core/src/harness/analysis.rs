//! Outcome categories for individual corrections, judged against the paraphrase.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correct::{Method, TokenCorrection};
use crate::error::CorrectionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionCategory {
    CorrectFix,
    PartialImprovement,
    UnnecessaryChange,
    HarmlessSynonym,
}

impl CorrectionCategory {
    pub const ALL: [CorrectionCategory; 4] = [
        CorrectionCategory::CorrectFix,
        CorrectionCategory::PartialImprovement,
        CorrectionCategory::UnnecessaryChange,
        CorrectionCategory::HarmlessSynonym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorrectionCategory::CorrectFix => "correct_fix",
            CorrectionCategory::PartialImprovement => "partial_improvement",
            CorrectionCategory::UnnecessaryChange => "unnecessary_change",
            CorrectionCategory::HarmlessSynonym => "harmless_synonym",
        }
    }
}

pub fn categorize_correction(
    tc: &TokenCorrection,
    paraphrase: &HashSet<String>,
) -> Result<CorrectionCategory, CorrectionError> {
    if !tc.changed {
        return Err(CorrectionError::Unchanged);
    }
    let orig = paraphrase.contains(&tc.original);
    let corr = paraphrase.contains(&tc.corrected);
    Ok(match (orig, corr) {
        (false, true) => CorrectionCategory::CorrectFix,
        (true, false) => CorrectionCategory::UnnecessaryChange,
        (true, true) => CorrectionCategory::HarmlessSynonym,
        (false, false) => CorrectionCategory::PartialImprovement,
    })
}

/// One changed query token, as written to the correction log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedCorrection {
    pub query_id: String,
    pub position: usize,
    #[serde(flatten)]
    pub correction: TokenCorrection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorAnalysis {
    pub method: Method,
    pub total_corrections: usize,
    pub sampled: usize,
    pub counts: BTreeMap<CorrectionCategory, usize>,
    pub percentages: BTreeMap<CorrectionCategory, f64>,
}

/// Categorizes up to `cap` corrections. When there are more, a seeded uniform
/// sample without replacement is drawn and processed in log order.
pub fn error_analysis(
    method: Method,
    log: &[LoggedCorrection],
    paraphrase_tokens: &BTreeMap<String, HashSet<String>>,
    cap: usize,
    seed: u64,
) -> Result<ErrorAnalysis, CorrectionError> {
    let usable: Vec<&LoggedCorrection> = log
        .iter()
        .filter(|c| c.correction.changed && paraphrase_tokens.contains_key(&c.query_id))
        .collect();
    let chosen: Vec<&LoggedCorrection> = if usable.len() > cap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx = sample(&mut rng, usable.len(), cap).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| usable[i]).collect()
    } else {
        usable.clone()
    };
    let mut counts: BTreeMap<CorrectionCategory, usize> =
        CorrectionCategory::ALL.iter().map(|c| (*c, 0)).collect();
    for c in &chosen {
        let cat = categorize_correction(&c.correction, &paraphrase_tokens[&c.query_id])?;
        *counts.get_mut(&cat).expect("all categories present") += 1;
    }
    let n = chosen.len();
    let percentages = counts
        .iter()
        .map(|(k, v)| {
            let pct = if n > 0 { 100.0 * *v as f64 / n as f64 } else { 0.0 };
            (*k, pct)
        })
        .collect();
    Ok(ErrorAnalysis {
        method,
        total_corrections: usable.len(),
        sampled: n,
        counts,
        percentages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correct::Reason;

    fn tc(original: &str, corrected: &str) -> TokenCorrection {
        TokenCorrection {
            original: original.into(),
            corrected: corrected.into(),
            changed: original != corrected,
            distance: 1,
            candidate_freq: 5,
            reason: if original != corrected {
                Reason::Corrected
            } else {
                Reason::InVocab
            },
        }
    }

    fn words(ws: &[&str]) -> HashSet<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn category_examples() {
        let p = words(&["hydralazine", "blood"]);
        assert_eq!(
            categorize_correction(&tc("hydrslazine", "hydralazine"), &p).unwrap(),
            CorrectionCategory::CorrectFix
        );
        let p = words(&["my", "son", "asked"]);
        assert_eq!(
            categorize_correction(&tc("son", "do"), &p).unwrap(),
            CorrectionCategory::UnnecessaryChange
        );
        let p = words(&["precaution", "precautions"]);
        assert_eq!(
            categorize_correction(&tc("precaution", "precautions"), &p).unwrap(),
            CorrectionCategory::HarmlessSynonym
        );
        let p = words(&["side", "effects"]);
        assert_eq!(
            categorize_correction(&tc("affeccts", "affects"), &p).unwrap(),
            CorrectionCategory::PartialImprovement
        );
        assert!(categorize_correction(&tc("same", "same"), &p).is_err());
    }

    fn logged(qid: &str, pos: usize, t: TokenCorrection) -> LoggedCorrection {
        LoggedCorrection {
            query_id: qid.into(),
            position: pos,
            correction: t,
        }
    }

    #[test]
    fn quarter_each() {
        let mut para = BTreeMap::new();
        para.insert("q".to_string(), words(&["fix", "keep", "a", "b"]));
        let log = vec![
            logged("q", 0, tc("fxi", "fix")),
            logged("q", 1, tc("keep", "kept")),
            logged("q", 2, tc("a", "b")),
            logged("q", 3, tc("zz", "yy")),
        ];
        let a = error_analysis(Method::EditDistance, &log, &para, 100, 42).unwrap();
        assert_eq!(a.sampled, 4);
        for c in CorrectionCategory::ALL {
            assert_eq!(a.percentages[&c], 25.0);
        }
    }

    #[test]
    fn empty_and_sampled() {
        let para = BTreeMap::new();
        let a = error_analysis(Method::Symspell, &[], &para, 100, 1).unwrap();
        assert_eq!(a.total_corrections, 0);
        assert!(a.percentages.values().all(|v| *v == 0.0));

        let mut para = BTreeMap::new();
        para.insert("q".to_string(), words(&["x"]));
        let log: Vec<_> = (0..250).map(|i| logged("q", i, tc(&format!("w{i}"), "x"))).collect();
        let a = error_analysis(Method::EditDistance, &log, &para, 100, 7).unwrap();
        assert_eq!((a.total_corrections, a.sampled), (250, 100));
        let b = error_analysis(Method::EditDistance, &log, &para, 100, 7).unwrap();
        assert_eq!(a, b);
    }
}
