use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("degenerate spectral parameter: indicial factor vanishes at order {order} (lambda = 1 - {order} + ...)")]
    DegenerateLambda { order: usize },
    #[error("integration failed at rho = {rho}: {reason}")]
    Integration { rho: f64, reason: String },
    #[error("contour inconclusive: {0}")]
    Inconclusive(String),
    #[error("refinement did not converge after {iterations} iterations (last |w| = {last_residual:e})")]
    Refinement { iterations: usize, last_residual: f64, trace: Vec<(f64, f64)> },
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("unstable time step: {0}")]
    StepSize(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("evolution diverged at tau = {last_good:.6}: {reason}")]
    Divergence { last_good: f64, reason: String },
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    #[error("blowup detection failed: {0}")]
    Detection(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
