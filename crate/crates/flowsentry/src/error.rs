use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("no rows survived sanitization")]
    EmptyAfterSanitize,

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "benign ratio {requested} infeasible without replacement; nearest achievable is {nearest}"
    )]
    InfeasibleRatio { requested: f64, nearest: f64 },

    #[error("all feature columns are constant")]
    AllColumnsConstant,

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("dimension mismatch: model expects {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{kind} fit failed during {stage}: {message}")]
    FitFailure {
        kind: &'static str,
        stage: &'static str,
        message: String,
    },

    #[error("AUC undefined: only one class present")]
    UndefinedAuc,

    #[error("sweep failed: {0}")]
    Sweep(String),
}
