use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The requested computation would exceed its configured work budget.
    #[error("budget exceeded for {what}: needs {needed}, limit {limit}")]
    Budget {
        what: &'static str,
        needed: u128,
        limit: u128,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    /// Floating accumulation did not land close enough to an integer.
    #[error("integer snap failed (residual {residual:e})")]
    Snap { residual: f64 },
    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}

pub(crate) fn check_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        Err(Error::Budget {
            what,
            needed,
            limit,
        })
    } else {
        Ok(())
    }
}
