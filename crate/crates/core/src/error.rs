use thiserror::Error;

/// Errors raised by the decomposition routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PvdError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("inner-product weights must be strictly positive (index {index} has {value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("size {size} exceeds the brute-force cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },

    #[error("term cap exceeded: {0}")]
    TermCap(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("enumeration too large: {estimate} configurations (limit {limit})")]
    GridTooLarge { estimate: f64, limit: f64 },
}

impl PvdError {
    /// Stable machine-readable code, used by the CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            PvdError::DimensionMismatch { .. } => "dimension_mismatch",
            PvdError::InvalidInput(_) => "invalid_input",
            PvdError::NonFinite(_) => "non_finite",
            PvdError::NonPositiveWeight { .. } => "non_positive_weight",
            PvdError::SizeCap { .. } => "size_cap",
            PvdError::UnsupportedDomain(_) => "unsupported_domain",
            PvdError::OutOfRange { .. } => "out_of_range",
            PvdError::TermCap(_) => "term_cap",
            PvdError::Unbounded => "lp_unbounded",
            PvdError::Infeasible => "lp_infeasible",
            PvdError::GridTooLarge { .. } => "grid_too_large",
        }
    }
}

pub type Result<T> = std::result::Result<T, PvdError>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> PvdError {
    PvdError::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
