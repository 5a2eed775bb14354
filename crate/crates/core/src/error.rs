use thiserror::Error;

use crate::syntax::ParseError;

/// Errors raised by the model operations of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("`tau` is reserved for the silent action and cannot be declared as a visible label")]
    ReservedTau,
    #[error("relation is not symmetric: ({0},{1}) is present but ({1},{0}) is not")]
    NotSymmetric(usize, usize),
    #[error("not a partition of the carrier: {0}")]
    NotAPartition(String),
    #[error("negative scalar {0}")]
    NegativeScalar(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("convex hull of an empty generator list")]
    EmptyHull,
    #[error("instance `{0}` has no binary join")]
    NoJoin(&'static str),
    #[error("instance `{0}` has no least morphism")]
    NoBottom(&'static str),
    #[error("saturation did not converge within {0} iterations")]
    NotConverged(usize),
    #[error("saturation routes disagree: {0}")]
    RouteMismatch(String),
    #[error("determinization exceeded {0} subset states")]
    SubsetLimit(usize),
    #[error("state limit of {0} states exceeded")]
    StateLimit(usize),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
