use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("ground set size {0} outside supported range 0..={max}", max = crate::set::MAX_N)]
    GroundSetTooLarge(usize),

    #[error("invalid element index {index} for ground set of size {n}")]
    InvalidElement { index: usize, n: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("conditioning on an event of probability zero (element {element}, present = {present})")]
    ZeroProbabilityEvent { element: usize, present: bool },

    #[error("ground sets overlap (mask {0:#b})")]
    OverlappingGroundSets(u32),

    #[error("invalid set system: {0}")]
    InvalidSystem(String),

    #[error("point lies outside the polytope: {0}")]
    OutsidePolytope(String),

    #[error("function must be monotone for this operation")]
    NotMonotone,

    #[error("{what} exceeds the enumeration cap ({detail})")]
    SizeCap { what: &'static str, detail: String },

    #[error("rejection sampling exhausted {0} attempts")]
    AttemptsExhausted(usize),

    #[error("linear program {0}")]
    Lp(String),

    #[error("invariant breach: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
