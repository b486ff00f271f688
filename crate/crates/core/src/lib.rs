//! Spelling correction for consumer health queries and its effect on
//! lexical passage retrieval.

pub mod census;
pub mod correct;
pub mod corpus;
pub mod edit;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod retrieval;
pub mod symspell;
pub mod synthetic;

pub use census::{calibrate, census, CalibrationEstimate, ErrorCensus, ErrorType};
pub use corpus::{
    build_vocabulary, load_jsonl, tokenize, Judgment, Passage, QueryRecord, Token, Vocabulary,
};
pub use correct::{
    ConfusablePairs, CorrectionCache, Corrector, CorrectorConfig, Lexicon, Method, TokenCorrection,
};
pub use edit::{levenshtein, Candidate, CandidateOrder};
pub use error::{CensusError, CorrectionError, DatasetError, HarnessError, IndexError, MetricsError};
pub use harness::{CellSpec, Condition, Experiment, GridReport, Settings};
pub use metrics::{GradePolicy, MetricsRow, Qrels};
pub use retrieval::{RankedList, Retriever, RetrieverKind};
pub use symspell::DeleteIndex;
