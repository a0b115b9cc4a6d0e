use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series did not converge within its term budget.
    #[error("series truncation failure at w={w}, alpha={alpha}: {terms} terms used")]
    Truncation { w: f64, alpha: f64, terms: usize },

    /// Adaptive quadrature hit its panel budget before reaching tolerance.
    #[error("quadrature budget exhausted: error estimate {error:.3e} after {panels} panels")]
    QuadratureBudget { error: f64, panels: usize },

    /// The operation's precondition excludes this family.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// A grid argument is malformed.
    #[error("grid error: {0}")]
    Grid(String),

    /// A vector argument has the wrong length.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The probe could not classify an integral side.
    #[error("inconclusive classification: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
