use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: field `{field}`: {message}")]
    Malformed {
        line: usize,
        field: String,
        message: String,
    },
    #[error("line {line}: duplicate id `{id}`")]
    Duplicate { id: String, line: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("delete index was built for vocabulary {expected}, got {actual}")]
    FingerprintMismatch { expected: String, actual: String },
    #[error("max distance {requested} exceeds index depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("index depth must be 1 or 2, got {0}")]
    InvalidDepth(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum CorrectionError {
    #[error("invalid corrector config: {0}")]
    InvalidConfig(String),
    #[error("{0} method requires a {1}")]
    MissingResource(&'static str, &'static str),
    #[error("blacklist line {line}: {message}")]
    Blacklist { line: usize, message: String },
    #[error("token was not changed")]
    Unchanged,
    #[error("query `{0}` has no paraphrase")]
    MissingParaphrase(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("query `{0}` has no paraphrase")]
    MissingParaphrase(String),
    #[error("no tokens to measure")]
    NoTokens,
    #[error("no OOV flags; yield ratio undefined")]
    NoFlags,
    #[error("yield ratio must lie in (0, 1], got {0}")]
    InvalidYield(f64),
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("bootstrap needs at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("bootstrap needs at least 1000 resamples, got {0}")]
    TooFewResamples(usize),
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Correction(#[from] CorrectionError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("no judgments loaded")]
    MissingJudgments,
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Validation problems (bad input data or config) as opposed to runtime failures.
    pub fn is_validation(&self) -> bool {
        match self {
            HarnessError::Dataset(DatasetError::Io { .. }) => false,
            HarnessError::Dataset(_)
            | HarnessError::MissingJudgments
            | HarnessError::InvalidConfig(_)
            | HarnessError::Census(_)
            | HarnessError::Metrics(_) => true,
            HarnessError::Correction(e) => !matches!(e, CorrectionError::Io(_)),
            HarnessError::Index(e) => !matches!(e, IndexError::Io(_)),
            HarnessError::Io { .. } | HarnessError::Json(_) => false,
        }
    }
}
