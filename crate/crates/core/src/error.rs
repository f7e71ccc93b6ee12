use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("item {index} is outside the ground set of size {universe}")]
    ItemOutOfRange { index: usize, universe: usize },

    #[error("item sets live on different ground sets ({left} vs {right})")]
    UniverseMismatch { left: usize, right: usize },

    #[error("item {0} is already in the set")]
    ItemAlreadyPresent(usize),

    #[error("peaks {first} and {second} intersect in {overlap} items, more than b = {b}")]
    NotBIntersecting {
        first: usize,
        second: usize,
        overlap: usize,
        b: String,
    },

    #[error("player {player}: sets {first} and {second} intersect in {overlap} items, more than b = {b}")]
    PlayerNotBIntersecting {
        player: usize,
        first: usize,
        second: usize,
        overlap: usize,
        b: String,
    },

    #[error("peaks {first} and {second} are identical")]
    DuplicatePeak { first: usize, second: usize },

    #[error("set is b-close to both peak {first} and peak {second}")]
    FamilyIntegrity { first: usize, second: usize },

    #[error("the given set is not a peak of this valuation")]
    NotAPeak,

    #[error("peak {0} is not contained in the support")]
    PeakOutsideSupport(usize),

    #[error("negative price {price} on item {item}")]
    NegativePrice { item: usize, price: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("search space of {required} nodes exceeds the guard of {limit}")]
    GuardExceeded { required: String, limit: u64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Malformed(err.to_string())
    }
}
