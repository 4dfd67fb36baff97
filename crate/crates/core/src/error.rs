use thiserror::Error;

use crate::ring_model::Parity;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "BdG determinant check failed for m={m}: |det(M - wI)| = {residual:e} exceeds {bound:e} at w = {omega}"
    )]
    DeterminantCheck {
        m: i32,
        omega: String,
        residual: f64,
        bound: f64,
    },

    #[error("non-finite field value at tau = {tau}; reduce dt")]
    BlowUp { tau: f64 },

    #[error("mode m={0} was not tracked in this record")]
    ModeNotTracked(i32),

    #[error("no growth window for mode m={m}: {reason}")]
    NoGrowthWindow { m: i32, reason: String },

    #[error(
        "{parity:?} solve not converged after {iterations} iterations (residual {residual:e}, |dmu| {delta_mu:e})"
    )]
    NotConverged {
        parity: Parity,
        iterations: usize,
        residual: f64,
        delta_mu: f64,
    },

    #[error("domain too small: |phi(+-L)| = {tail:e} at L = {half_length}")]
    DomainTooSmall { tail: f64, half_length: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
