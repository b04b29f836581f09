//! Error type shared by all fidcorr modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix data length {len} does not match dimension {dim}x{dim}")]
    BadShape { dim: usize, len: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} below -{tol:.1e}")]
    NotPositiveSemidefinite { eigenvalue: f64, tol: f64 },

    #[error("trace defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitTrace { defect: f64, tol: f64 },

    #[error("eigensolver did not converge for a dimension-{dim} matrix")]
    EigenSolverFailed { dim: usize },

    #[error("Hilbert dimension {dim} exceeds the configured cap {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("{name} = {value} is outside [{low}, {high}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("site index {site} is out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("state is not strongly symmetric: defect {defect:.3e}")]
    NotStronglySymmetric { defect: f64 },

    #[error("operator is not unitary: defect {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("operator is not charged under the symmetry: {0}")]
    NotCharged(String),

    #[error("no decaying signal: every correlator is below the positivity floor")]
    NoSignal,

    #[error("need at least {needed} distinct distances with positive values, found {found}")]
    InsufficientDistances { needed: usize, found: usize },

    #[error("fit produced a non-positive decay parameter {value:.3e}")]
    NotDecaying { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric overflow in {0}")]
    NumericOverflow(&'static str),

    #[error("malformed state container: {0}")]
    BadContainer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
