use thiserror::Error;

/// Errors raised by the analysis engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator index {index} out of range for a basis of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("non-finite coefficient {0}")]
    NonFinite(f64),
    #[error("imaginary residual offset {0:e}: monomial combination is not Hermitian")]
    NonHermitianOffset(f64),
    #[error("basis mismatch: {0} modes vs {1} modes")]
    BasisMismatch(usize, usize),
    #[error("mode count must be positive")]
    EmptyBasis,
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape { rows: usize, cols: usize, expected: usize },
    #[error("eigen iteration did not converge: {0}")]
    NoConvergence(&'static str),
    #[error("eigenvalue {0:e} has no partner of opposite sign")]
    Unpaired(f64),
    #[error("eigenvalue with imaginary part {0:e} cannot be paired")]
    NonRealFrequency(f64),
    #[error("frequency {0:e}: ladder pair has vanishing commutator")]
    IllPosedPair(f64),
    #[error("zero coefficient vector is not a ladder operator")]
    ZeroVector,
    #[error("not an eigenoperator: residual {residual:e} exceeds {tolerance:e}")]
    NotEigenoperator { residual: f64, tolerance: f64 },
    #[error("no lattice for a spectrum classified as {0}")]
    LatticeUnavailable(&'static str),
    #[error("truncation dimension {dim} exceeds cap {cap}")]
    TruncationCap { dim: usize, cap: usize },
    #[error("assembled Fock matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
