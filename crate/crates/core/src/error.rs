use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two observations compared equal (or were incomparable, e.g. NaN).
    /// `column` is set when the tie was found in a column of a data matrix.
    #[error("ties detected{}", column.map(|c| format!(" in column {c}")).unwrap_or_default())]
    TiesDetected { column: Option<usize> },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension too small: {what} is {got}, need at least {min}")]
    DimensionTooSmall {
        what: &'static str,
        got: usize,
        min: usize,
    },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("non-positive whitening eigenvalue λ{index} = {value:e}")]
    NonPositiveEigenvalue { value: f64, index: usize },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for the failures caused by degenerate numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. } | Error::NonPositiveEigenvalue { .. }
        )
    }

    pub(crate) fn with_column(self, col: usize) -> Self {
        match self {
            Error::TiesDetected { .. } => Error::TiesDetected { column: Some(col) },
            e => e,
        }
    }
}
