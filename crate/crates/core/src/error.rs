use thiserror::Error;

use crate::causal::EventId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator relation has a cycle: {witness:?}")]
    Cycle { witness: Vec<EventId> },

    #[error("unknown event id {0}")]
    UnknownEvent(usize),

    #[error("events {a} and {b} are not related")]
    NotRelated { a: EventId, b: EventId },

    #[error("side lengths ({l12}, {l23}, {l13}) violate the reverse triangle inequality")]
    Unrealizable { l12: f64, l23: f64, l13: f64 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("not a metric: triangle ({a}, {b}, {c}) has slack {slack}")]
    NonMetric { a: usize, b: usize, c: usize, slack: f64 },

    #[error("triangle inequality violated by sides ({ab}, {ac}, {bc})")]
    TriangleInequality { ab: f64, ac: f64, bc: f64 },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("maximizer family does not localize: dispersion {dispersion} exceeds {threshold}")]
    NoLimit { dispersion: f64, threshold: f64 },

    #[error("no chronologically related parameter pairs")]
    NoRelatedPairs,

    #[error("no chain reaches the top slab")]
    EmptyHorizon,

    #[error("event {0} is not in the past of any line event")]
    NotInPast(EventId),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
