use thiserror::Error;

/// Errors raised by the model, simulation and pricing layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("price {price} outside the open interval ({lower}, 1) for log-strike {kappa}")]
    PriceOutOfBounds { price: f64, lower: f64, kappa: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("asymptotic formula for regime {regime} requires {requirement}")]
    Guard {
        regime: &'static str,
        requirement: &'static str,
    },

    #[error("requested variant `{requested}` does not apply to regime {regime}")]
    RegimeMismatch {
        requested: &'static str,
        regime: &'static str,
    },

    #[error("series did not start decreasing within {cap} terms")]
    SeriesDivergence { cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        reason,
    }
}
