use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid scale {value:?} at position {index}: scales must be >= 1")]
    InvalidScale { index: usize, value: String },
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("no value for symbol {0:?}")]
    MissingSymbol(String),
    #[error("ambiguous chain step {step}: distinct subgroups of dimension {dim} share the maximal slope")]
    AmbiguousCandidates { step: usize, dim: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("certificate violation ({check}) at step {step}: {detail}")]
    CertificateViolation {
        check: String,
        step: usize,
        detail: String,
    },
    #[error("subgroups are not nested: {0}")]
    NotNested(String),
    #[error("enumeration of {requested} tuples exceeds the limit {limit}")]
    EnumerationTooLarge { requested: u128, limit: u128 },
    #[error("model has formal symbols; specialize it to a rational model first")]
    SymbolicModelNotSpecialized,
    #[error("matrix with {requested} entries exceeds the limit {limit}")]
    MatrixTooLarge { requested: u128, limit: u128 },
    #[error("could not sample {wanted} points outside the coset union (step {step})")]
    SamplingExhausted { step: usize, wanted: usize },
    #[error("parse error at line {line}, column {column}: {message}")]
    ParseError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    ValidationError { field: String, message: String },
}

impl Error {
    /// Stable machine-readable code, used in CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidScale { .. } => "invalid_scale",
            Error::DuplicateSymbol(_) => "duplicate_symbol",
            Error::UnknownSymbol(_) => "unknown_symbol",
            Error::MissingSymbol(_) => "missing_symbol",
            Error::AmbiguousCandidates { .. } => "ambiguous_candidates",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::CertificateViolation { .. } => "certificate_violation",
            Error::NotNested(_) => "not_nested",
            Error::EnumerationTooLarge { .. } => "enumeration_too_large",
            Error::SymbolicModelNotSpecialized => "symbolic_model_not_specialized",
            Error::MatrixTooLarge { .. } => "matrix_too_large",
            Error::SamplingExhausted { .. } => "sampling_exhausted",
            Error::ParseError { .. } => "parse_error",
            Error::ValidationError { .. } => "validation_error",
        }
    }

    pub fn is_certificate_violation(&self) -> bool {
        matches!(self, Error::CertificateViolation { .. })
    }

    pub(crate) fn violation(check: &str, step: usize, detail: impl Into<String>) -> Self {
        Error::CertificateViolation {
            check: check.to_string(),
            step,
            detail: detail.into(),
        }
    }
}
