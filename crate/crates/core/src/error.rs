use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported cap {cap}")]
    Capacity {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("infeasible densities: {0}")]
    InfeasibleDensity(String),
    #[error("closed form unavailable: {0}")]
    UnsupportedClosedForm(String),
    #[error("no pocket orbit: E = {energy} must exceed omega0^2 + x_c^2 = {threshold}")]
    NoPocket { energy: f64, threshold: f64 },
    #[error("expected {expected} eigenvalues, found {found}")]
    RootCount { expected: usize, found: usize },
    #[error("quadrature did not converge: {0}")]
    Accuracy(String),
    #[error("coefficient solve failed to meet the density targets, residual {residual:e}")]
    Unsolvable { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
