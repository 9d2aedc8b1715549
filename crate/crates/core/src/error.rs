use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("variable slot {slot} out of range for a jet space with {nvars} variables")]
    SlotOutOfRange { slot: usize, nvars: usize },

    #[error("derivative of total degree {degree} requested from a jet of order {order}")]
    DegreeTooHigh { degree: usize, order: usize },

    #[error("jet {op} outside its domain (base value {value})")]
    Domain { op: &'static str, value: f64 },

    #[error("chart violation: {0}")]
    Chart(String),

    #[error("metric is not smooth at the requested point: {0}")]
    NonSmooth(String),

    #[error("Finsler positivity violated: F = {0}")]
    NotPositive(f64),

    #[error("degenerate fundamental tensor (|det| = {det:e}, scale {scale:e})")]
    Degenerate { det: f64, scale: f64 },

    #[error("null direction: L = {0:e}, division by L undefined")]
    NullDirection(f64),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("vector field is not timelike at the base point (L = {0})")]
    NotTimelike(f64),

    #[error("base metric is not Berwald at {x:?} (max third y-derivative of spray {third:e})")]
    NotBerwald { x: Vec<f64>, third: f64 },

    #[error("quadrature did not converge (last refinement gap {gap:e} with {nodes} nodes)")]
    QuadratureNotConverged { gap: f64, nodes: usize },

    #[error("ill-conditioned matrix: {0}")]
    IllConditioned(String),

    #[error("finite differences dominated by noise (step-halving gap {gap:e}, value scale {scale:e})")]
    NoiseDominated { gap: f64, scale: f64 },

    #[error("invalid metric specification: {0}")]
    InvalidSpec(String),

    #[error("operation not supported for this metric: {0}")]
    Unsupported(String),
}

impl Error {
    /// Errors that mean "this point is outside the smooth, nondegenerate region".
    pub fn is_inadmissible(&self) -> bool {
        matches!(
            self,
            Error::NonSmooth(_)
                | Error::Domain { .. }
                | Error::Degenerate { .. }
                | Error::Chart(_)
                | Error::NotPositive(_)
        )
    }
}
