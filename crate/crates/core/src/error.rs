use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidSpec(String),

    /// The superposition has (numerically) vanishing norm, e.g. theta = pi/4,
    /// phi = pi and identical packet centres.
    #[error("zero-norm state: normalization bracket {bracket:e} is below {threshold:e}")]
    ZeroNormState { bracket: f64, threshold: f64 },

    #[error("quadrature did not converge: estimate {value:e} with error {error:e} after {panels} panels")]
    QuadratureNotConverged {
        value: f64,
        error: f64,
        panels: usize,
    },

    #[error("optimizer did not converge after {iterations} iterations (simplex diameter {diameter:e})")]
    NotConverged { iterations: usize, diameter: f64 },

    #[error("argument {0} is outside the domain of the function")]
    DomainError(f64),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. } | Error::NotConverged { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
