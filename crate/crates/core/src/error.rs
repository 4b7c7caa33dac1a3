use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A field of a domain type violates its invariant.
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("n_bound {n} exceeds the brute-force oracle cap {cap}")]
    CapExceeded { n: u32, cap: u32 },

    #[error("quadrature for {what} did not converge")]
    QuadratureNotConverged { what: String },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error(
        "x1^2 + alpha2 x2^2 - xi must stay positive on the window support: xi = {xi} >= {limit}"
    )]
    PositivityViolated { xi: f64, limit: f64 },

    #[error("spectral integral has imaginary part {im:e} against real part {re:e}")]
    QuadratureImbalance { re: f64, im: f64 },

    #[error("|t| = {t} exceeds the evaluation budget {cap}")]
    BudgetExceeded { t: f64, cap: f64 },

    #[error("records span several values of n: {0:?}")]
    MixedN(Vec<u32>),

    #[error("exponent fit needs >= 4 distinct n spanning >= 2 octaves, got {0:?}")]
    InsufficientRange(Vec<u32>),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
