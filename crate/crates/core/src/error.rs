use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("period {t_period} does not divide series length {len}")]
    NonDivisorPeriod { t_period: usize, len: usize },

    #[error("period {t_period} exceeds series length {len}")]
    PeriodExceedsLength { t_period: usize, len: usize },

    #[error("series already contains missing entries; simulation needs a complete series")]
    PreexistingMissing,

    #[error("missing rate {0} outside [0, 0.95]")]
    RateOutOfRange(f64),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no observed value to impute from")]
    AllMissing,

    #[error("chained equations need at least two columns")]
    SingleColumn,

    #[error("univariate MICE-RF and KNN imputation need a period (t_period)")]
    MissingPeriod,

    #[error(
        "t_period is only meaningful for univariate series; multichannel series are imputed \
         on the epoch x channel grid without reshaping"
    )]
    PeriodOnMultivariate,

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("classifier supports binary 0/1 labels only")]
    MulticlassUnsupported,

    #[error("k = {k} exceeds training size {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("class {class} has {count} members, fewer than {folds} folds")]
    ClassTooSmall { class: usize, count: usize, folds: usize },

    #[error("empty mask")]
    EmptyMask,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("malformed CSV {} (row {row}, column {column}): {message}", path.display())]
    MalformedCsv {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-finite value {value:?} in {} (row {row}, column {column})", path.display())]
    NonFiniteValue {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{} has {got} channels but earlier series have {expected}", path.display())]
    InconsistentChannelCount {
        path: PathBuf,
        expected: usize,
        got: usize,
    },

    #[error("series {series_id}, rate {rate}, method {method}: {source}")]
    Context {
        series_id: String,
        rate: f64,
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the sweep coordinates that produced it.
    pub fn in_context(self, series_id: &str, rate: f64, method: &str) -> Error {
        Error::Context {
            series_id: series_id.to_string(),
            rate,
            method: method.to_string(),
            source: Box::new(self),
        }
    }
}
