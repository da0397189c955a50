use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("tuple has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("weight {k:?} with w = {w} is not paritious")]
    NotParitious { k: Vec<i64>, w: i64 },

    #[error("order {value} at index {index} is not a multiple of {step}")]
    Divisibility { index: usize, value: u64, step: u64 },

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("normalization factors differ: {0} vs {1}")]
    NormalizationMismatch(i64, i64),

    #[error("homomorphism endpoints do not match")]
    EndpointMismatch,

    #[error("non-admissible homomorphism: {0}")]
    NotAdmissible(String),

    #[error("malformed complex: {0}")]
    MalformedComplex(String),

    #[error("exponent search exhausted its budget of {budget}")]
    BudgetExhausted { budget: u64 },

    #[error("ill-defined monomial map: {0}")]
    IllDefinedMonomialMap(String),

    #[error("inconsistent multigrading: {0}")]
    InconsistentGrading(String),

    #[error("box {given:?} too small, need at least {required:?}")]
    BoxTooSmall { given: Vec<i64>, required: Vec<i64> },

    #[error("matrices are not composable: {0}")]
    Composability(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("unlabeled element: {0}")]
    Unlabeled(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}
