use thiserror::Error;

/// Errors produced by the exact computations and reductions in this crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("matrix not PSD")]
    NotPsd,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}` (malformed subset)")]
    UnknownLabel(String),

    #[error("weight for `{0}` must be strictly positive")]
    NonPositiveWeight(String),

    #[error("matrix labels do not match graph edge ids: {0}")]
    LabelMismatch(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("enumeration cap exceeded: {what} is {size}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("interpolation: {0}")]
    Interpolation(String),

    #[error("interpolation requires exact oracle")]
    InexactOracle,

    #[error("empty support: the normalizing constant is zero")]
    EmptySupport,

    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),

    #[error("rank-one reweighting factor must be positive, got {0}")]
    NonPositiveFactor(String),

    #[error("malformed independence oracle: {0}")]
    MalformedOracle(String),

    #[error("malformed gadget: {0}")]
    MalformedGadget(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by an enumeration cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
