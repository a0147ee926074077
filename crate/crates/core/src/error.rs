use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The configured geometry does not describe a valid coverage cap.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    Quadrature {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    /// A probability left [0, 1] by more than rounding; indicates a formula bug.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("nearest association needs at least one aerial vehicle")]
    NoAerialVehicles,

    /// Invalid configuration value; `key` is the fully qualified config key.
    #[error("invalid config: {key}: {message}")]
    Config { key: String, message: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors raised by numerical procedures rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature { .. } | Error::Consistency(_))
    }
}
