use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {what} (estimate {estimate:e}, error {error:e})")]
    Quadrature {
        what: String,
        estimate: f64,
        error: f64,
    },

    /// A kernel series needs more terms than the configured cap.
    #[error("series truncation needs more than {cap} terms (achieved tail bound {achieved:e})")]
    Truncation { cap: usize, achieved: f64 },

    /// A kernel series was evaluated outside the region it was built for.
    #[error("|<w,z>| = {modulus} exceeds the validity radius {rho_max}")]
    OutOfValidity { modulus: f64, rho_max: f64 },

    /// An integral that was required to be finite diverges.
    #[error("divergent integral: {0}")]
    Divergent(String),

    /// A weight description is invalid (non-positive, non-integrable, malformed parameters).
    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("parse error: {0}")]
    Parse(String),
}
