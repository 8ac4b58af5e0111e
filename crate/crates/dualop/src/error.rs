use thiserror::Error;

/// Errors surfaced by construction, factorization, and kernel entry points.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape or length disagreement between operands.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Malformed sparse or dense structure (unsorted/duplicate column
    /// indices, bad row pointers, out-of-range indices, ld < n_cols).
    #[error("invalid matrix structure: {0}")]
    Structure(String),

    /// Cholesky pivot failure: the matrix is not positive definite.
    #[error("matrix is not positive definite (pivot at column {col} is {value:e})")]
    NotPositiveDefinite { col: usize, value: f64 },

    /// A triangular factor with a zero or missing diagonal entry.
    #[error("singular triangular factor: row {row} has no positive diagonal")]
    SingularFactor { row: usize },

    /// Invalid scalar or configuration parameter.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A stepped profile that does not describe the matrix it accompanies.
    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    /// Geometrically degenerate finite element.
    #[error("degenerate element: {0}")]
    DegenerateElement(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Unparseable Matrix Market or CSV content.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
