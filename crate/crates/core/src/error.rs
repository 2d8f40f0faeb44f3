use thiserror::Error;

/// Errors raised by every operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("centered returns have rank {rank} < {assets}: some non-zero portfolio has constant return")]
    RankDeficient { rank: usize, assets: usize },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("ragged input: row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("too many scenarios for this envelope: {scenarios} > {max}")]
    TooManyScenarios { scenarios: usize, max: usize },

    #[error("combinatorial guard exceeded: more than {limit} candidates")]
    CombinatorialGuard { limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("objects live on different probability spaces")]
    SpaceMismatch,

    #[error("intersection is empty")]
    EmptyIntersection,

    #[error("dimension {dim} exceeds the guard of {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("direction must be non-zero")]
    ZeroDirection,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration cap of {0} exceeded")]
    IterationLimit(usize),

    #[error("optimal face is unbounded along ray {ray:?}")]
    UnboundedFace { ray: Vec<f64> },

    #[error("portfolio risk generators span only {rank} of {assets} dimensions")]
    SpanDeficient { rank: usize, assets: usize },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("portfolio has zero deviation")]
    ZeroRiskPortfolio,

    #[error("selector output is not a risk identifier: {0}")]
    NotAnIdentifier(String),

    #[error("dichotomy violated: {0}")]
    DichotomyViolation(String),

    #[error("posterior densities underflow (max log-density {max_log_density})")]
    NumericUnderflow { max_log_density: f64 },

    #[error("risk function is not positively homogeneous (piece {piece} has intercept {intercept})")]
    NonHomogeneous { piece: usize, intercept: f64 },

    #[error("certification failed: {0}")]
    Certification(String),
}

impl Error {
    /// Errors caused by bad input rather than by numerical limits.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::TooManyScenarios { .. }
                | Error::CombinatorialGuard { .. }
                | Error::DimensionGuard { .. }
                | Error::IterationLimit(_)
                | Error::UnboundedFace { .. }
                | Error::NumericUnderflow { .. }
                | Error::Certification(_)
                | Error::DichotomyViolation(_)
                | Error::Infeasible
                | Error::Unbounded
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidProbabilities(_) => "invalid_probabilities",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Empty(_) => "empty",
            Error::Ragged { .. } => "ragged",
            Error::TooManyScenarios { .. } => "too_many_scenarios",
            Error::CombinatorialGuard { .. } => "combinatorial_guard",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Unsupported(_) => "unsupported",
            Error::SpaceMismatch => "space_mismatch",
            Error::EmptyIntersection => "empty_intersection",
            Error::DimensionGuard { .. } => "dimension_guard",
            Error::ZeroDirection => "zero_direction",
            Error::Infeasible => "infeasible",
            Error::Unbounded => "unbounded",
            Error::IterationLimit(_) => "iteration_limit",
            Error::UnboundedFace { .. } => "unbounded_face",
            Error::SpanDeficient { .. } => "span_deficient",
            Error::Assumption(_) => "assumption",
            Error::ZeroRiskPortfolio => "zero_risk_portfolio",
            Error::NotAnIdentifier(_) => "not_an_identifier",
            Error::DichotomyViolation(_) => "dichotomy_violation",
            Error::NumericUnderflow { .. } => "numeric_underflow",
            Error::NonHomogeneous { .. } => "non_homogeneous",
            Error::Certification(_) => "certification",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
