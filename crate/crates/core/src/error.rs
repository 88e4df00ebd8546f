use thiserror::Error;

use crate::lattice::LatticePoint;

/// Errors raised by the lattice, walk and oracle layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("dimension {0} is not supported (need d >= 2)")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("modulus k = {0} is invalid (need k >= 2)")]
    InvalidModulus(u64),

    #[error("state {0} is not primitive")]
    NotPrimitive(LatticePoint),

    #[error("state {point} is not coprime to {k}")]
    NotCoprime { point: LatticePoint, k: u64 },

    #[error("integer overflow in lattice arithmetic")]
    Overflow,

    #[error("invalid step distribution: {}", .0.join("; "))]
    InvalidMeasure(Vec<String>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search cap reached: {0}")]
    SearchCap(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: u64, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no contraction found on the step grid")]
    NoContractionFound,

    #[error("undefined: {0}")]
    Undefined(String),
}

impl WalkError {
    /// True for errors that stem from bad input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            WalkError::InvalidDimension(_)
                | WalkError::DimensionMismatch { .. }
                | WalkError::InvalidModulus(_)
                | WalkError::NotPrimitive(_)
                | WalkError::NotCoprime { .. }
                | WalkError::InvalidMeasure(_)
                | WalkError::InvalidConfig(_)
                | WalkError::Precondition(_)
        )
    }
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
