use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the simulation layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a Gaussian state needs at least one mode")]
    NoModes,

    #[error("mode index {index} is out of range for a {n_modes}-mode state")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("mode index {0} appears more than once")]
    DuplicateMode(usize),

    #[error("{name} = {value} is outside the allowed range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("covariance violates the uncertainty relation (min eigenvalue of cov + iJ is {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("quadrature combination has no terms")]
    EmptyCombination,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("beam splitter setting must be resolved to a transmittance before building the state")]
    UnresolvedSplitter,

    #[error("infeasible target: {0}")]
    Infeasible(String),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
