use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum BgwError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (last |term| = {last_term:e}, partial sum = {partial_sum})")]
    NonConvergence {
        terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BgwError>;
