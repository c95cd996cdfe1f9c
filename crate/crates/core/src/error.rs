use thiserror::Error;

/// Errors raised by the enumeration kernels, weight sums and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A size parameter is outside the range an operation supports.
    #[error("{what} = {value} is out of range (allowed {min}..={max})")]
    Bound {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    /// Arguments violate a precondition of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller-declared constants are inconsistent with the data.
    #[error("inconsistent input data: {0}")]
    Data(String),

    /// A supremum search never turned around inside the doubling bracket.
    #[error("objective still increasing at mu = {mu_hi:.6e}; supremum is not attained")]
    Unbounded { mu_hi: f64 },

    /// Monte Carlo error bars are wider than the caller allows.
    #[error("Monte Carlo standard error {stderr:.3e} exceeds threshold {threshold:.3e}")]
    Precision { stderr: f64, threshold: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_bound(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        return Err(Error::Bound { what, value, min, max });
    }
    Ok(())
}
