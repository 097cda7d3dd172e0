use thiserror::Error;

/// Errors raised by constructions, audits and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a probability vector: {0}")]
    NotOnSimplex(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("abscissae must be strictly increasing (offending value {0})")]
    NonIncreasingAbscissa(f64),

    #[error("expected identification function has no sign change: {0}")]
    NoSignChange(String),

    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    #[error("boundary sample matrix is rank deficient (second-smallest singular value {sigma:e}, threshold {threshold:e})")]
    RankDeficient { sigma: f64, threshold: f64 },

    #[error("boundary hyperplane misses the relative interior of the simplex")]
    EmptyBoundary,

    #[error("cannot orient normal {index}: {reason}")]
    Orientation { index: usize, reason: String },

    #[error("property is not strongly orderable: {0}")]
    NotStronglyOrderable(String),

    #[error("outer slope {given} does not dominate the chord slopes (needs at least {required})")]
    OuterSlope { given: f64, required: f64 },

    #[error("envelope loss does not reproduce the cost at report {report}, outcome {outcome}: expected {expected}, found {found}")]
    EmbeddingMismatch {
        report: usize,
        outcome: usize,
        expected: f64,
        found: f64,
    },

    #[error("interpolated identification function decreases for outcome {outcome}")]
    NonMonotone { outcome: usize },

    #[error("property range [{min}, {max}] is degenerate")]
    DegenerateRange { min: f64, max: f64 },

    #[error("denominator of the ratio of expectations vanishes ({0:e})")]
    VanishingDenominator(f64),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("no prediction for feature `{0}`")]
    MissingPrediction(String),

    #[error("predictor kind mismatch: expected {expected}, found {found}")]
    PredictorKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("search budget exhausted (best ratio {best_ratio})")]
    SearchExhausted { best_ratio: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
