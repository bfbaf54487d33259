use nalgebra::DVector;

use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("full space of {n_spins} spins exceeds the cap of {cap} spins")]
    DimensionCap { n_spins: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operation requires {expected} representation")]
    Representation { expected: &'static str },

    #[error("X-axis bond {bond} cannot be represented in the single-excitation sector")]
    UnsupportedAxis { bond: usize },

    #[error("matrix has no zero eigenvalue (smallest |λ| = {min_abs:e}, tolerance {tolerance:e})")]
    NoZeroEigenvalue { min_abs: f64, tolerance: f64 },

    #[error("zero eigenspace is {} dimensional", basis.len())]
    DegenerateNullSpace { basis: Vec<DVector<C64>> },

    #[error("mixing amplitude F = sqrt(K² + L²) is below the floor {floor:e} at t = {t}")]
    BelowFloor { t: f64, floor: f64 },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("norm drift {drift:e} exceeds the limit {limit:e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

impl Error {
    /// True for failures of the numerical integration itself, as opposed to
    /// rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepUnderflow { .. } | Error::NormDrift { .. })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
