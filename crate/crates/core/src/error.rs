use thiserror::Error;

use crate::point::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("schedule index {index} out of range for explicit schedule of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("point x={x} is outside the effective domain of {oracle}")]
    Domain { oracle: String, x: Point },

    #[error("exact subdifferential empty at x={x}")]
    EmptySubdifferential { x: Point },

    #[error("no closed-form resolvent for {0}")]
    UnsupportedResolvent(String),

    #[error("epsilon-subdifferential of {oracle} is not supported: {reason}")]
    UnsupportedSubdifferential { oracle: String, reason: String },

    #[error("epsilon-subdifferential of {oracle} at x={x} has no finite boundary point")]
    NoBoundaryPoint { oracle: String, x: Point },

    #[error("specialization mismatch: {0}")]
    SpecializationMismatch(String),

    #[error("baseline inapplicable at n={n}: {source}")]
    BaselineInapplicable {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("schedule rejected: {}", .reasons.join("; "))]
    InvalidSchedule { reasons: Vec<String> },

    #[error("trace is thinned (record_every = {record_every}); full resolution is required")]
    InsufficientResolution { record_every: usize },

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
