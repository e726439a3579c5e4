use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("parts must be weakly increasing: {0:?}")]
    NotSorted(Vec<u32>),
    #[error("partitions have different weight or length")]
    Incomparable,
    #[error("{0:?} is not dominated by the root partition {1:?}")]
    NotDominated(Vec<u32>, Vec<u32>),
    #[error("squeeze R^{s}_({i},{j}) is not admissible for {parts:?}")]
    Inadmissible {
        parts: Vec<u32>,
        i: usize,
        j: usize,
        s: u32,
    },
    #[error("resource cap exceeded: {what} > {limit}")]
    ResourceCap { what: &'static str, limit: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
