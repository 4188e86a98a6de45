use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("action space must contain at least one action")]
    EmptyActionSpace,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid probability mass at index {index}: {value}")]
    InvalidMass { index: usize, value: f64 },

    /// Total mass differs from one by more than the acceptance tolerance.
    #[error("distribution is not normalized (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("cost order must be at least 1")]
    InvalidOrder,

    #[error("boundary index {index} outside action range 0..{size}")]
    BoundaryOutOfRange { index: usize, size: usize },

    #[error("invalid cost matrix: {0}")]
    InvalidCostMatrix(String),

    #[error("regularization strength must be positive and finite, got {0}")]
    InvalidRegularization(f64),

    #[error("sinkhorn did not converge in {iterations} iterations (marginal residual {residual:e})")]
    SinkhornNotConverged { iterations: usize, residual: f64 },

    #[error("transportation simplex exceeded {0} pivots")]
    SimplexIterationLimit(usize),

    #[error("KL* epsilon must lie in (0, 1/{size}), got {epsilon}")]
    InvalidEpsilon { epsilon: f64, size: usize },

    #[error("action index {index} outside action range 0..{size}")]
    ActionOutOfRange { index: usize, size: usize },

    #[error("historical prior requires a non-empty action history")]
    EmptyHistory,

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("invalid game configuration: {0}")]
    InvalidConfig(String),

    #[error("contribution {contribution} outside 0..={endowment}")]
    ContributionOutOfRange { contribution: u32, endowment: u32 },

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("discount must lie in [0, 1), got {0}")]
    InvalidDiscount(f64),

    #[error("lambda must be nonnegative and finite, got {0}")]
    InvalidLambda(f64),

    #[error("utilities must be finite")]
    NonFiniteUtility,

    #[error("policy evaluation did not converge in {0} sweeps")]
    EvaluationNotConverged(usize),

    #[error("panel is empty")]
    EmptyPanel,

    #[error("line {line}: {reason}")]
    PanelRow { line: u64, reason: String },

    #[error("panel is missing column {0:?}")]
    MissingColumn(&'static str),

    #[error("no panel data at or before round {0}")]
    NoDataBeforeRound(u32),

    #[error("panel must span at least two rounds")]
    TooFewRounds,

    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than runtime failure.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::SinkhornNotConverged { .. }
                | Error::SimplexIterationLimit(_)
                | Error::EvaluationNotConverged(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
