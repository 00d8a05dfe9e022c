use thiserror::Error;

/// Errors raised by the model, solvers and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("eigensolver failed for a {dim}x{dim} matrix (||H||_1 = {norm_one:.3e}, non-normality ||HH*-H*H||_F/||H||_F^2 = {non_normality:.3e}): {message}")]
    Eigensolver {
        message: String,
        dim: usize,
        norm_one: f64,
        non_normality: f64,
    },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    /// The field or an operator norm overflowed.
    #[error("divergence: {0}")]
    Divergence(String),
    /// A formally constructed bound state is not normalizable.
    #[error("delocalized state: {0}")]
    Delocalized(String),
    #[error("exceptional-point singularity: {0}")]
    ExceptionalPoint(String),
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),
    /// A run ended before its observable became meaningful.
    #[error("inconclusive run: {0}")]
    Inconclusive(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Contract(_) | Error::Csv(_))
    }
}
