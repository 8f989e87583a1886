use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be a number, got NaN")]
    NotANumber { name: &'static str },

    #[error("group size must be at least 1")]
    EmptyGroup,

    #[error("simulation needs at least one step")]
    NoSteps,

    /// The society-optimal system solver stalled. Carries the best iterate.
    #[error("solver did not converge after {iterations} iterations (t1={t1}, t2={t2}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        t1: f64,
        t2: f64,
        residual: f64,
    },
}

impl Error {
    /// True for precondition violations on numeric inputs.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::NoConvergence { .. })
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<f64> {
    let value = ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}
