use crate::numerics::Cx;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("degenerate spectrum: eigenvalues {a} and {b} are not separated (|diff| = {gap:e})")]
    DegenerateSpectrum { a: Cx, b: Cx, gap: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed operator: {0}")]
    MalformedOperator(String),

    #[error("series truncated: A_0..A_{needed} required, {supplied} supplied (zero-pad explicitly)")]
    Truncated { needed: usize, supplied: usize },

    #[error("columns {a} and {b} have identical growth keys")]
    Tie { a: usize, b: usize },

    #[error("insufficient data: {got} samples, at least {need} required")]
    InsufficientData { got: usize, need: usize },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}
