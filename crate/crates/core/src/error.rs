use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {threshold:.3e}")]
    NotHermitian { deviation: f64, threshold: f64 },

    #[error("unknown atom label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate atom label `{0}`")]
    DuplicateLabel(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("a measure needs at least one atom")]
    EmptyMeasure,

    #[error("scaling weight {index} must be strictly positive and finite, got {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("invalid arc [{start}, {end})")]
    InvalidArc { start: f64, end: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("atom labels do not match: expected `{expected}`, got `{got}`")]
    LabelMismatch { expected: String, got: String },

    #[error("form is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("measure is not normalized: {0}")]
    NotNormalized(String),

    #[error("invalid coefficient matrix: {0}")]
    InvalidCoefficients(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported schema version `{0}`")]
    SchemaVersion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
