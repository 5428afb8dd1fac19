use thiserror::Error;

/// Errors raised by the simulation primitives.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension must be a power of two and at least 2, got {0}")]
    InvalidDim(usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |M - M†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U†U - I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("eigenphase {0:.9} is within {1:.1e} of ±π; matrix logarithm branch is ambiguous")]
    BranchAmbiguity(f64, f64),

    #[error("eigenvalues are degenerate (gap {0:.3e} rad/s)")]
    DegenerateEigenvalues(f64),

    #[error("spin system has zero splitting; the phase-gate delay is undefined")]
    ZeroSplitting,

    #[error("sequence contains a finite-width pulse; zeroth-order average requires delta pulses")]
    FinitePulse,

    #[error("no evolution-time array found within budget (best residual {0:.3e}, tolerance {1:.3e})")]
    SearchFailed(f64, f64),

    #[error("spectrum has a near-degenerate pair (gap {0:.3e} rad/s); time-array projection undefined")]
    DegenerateSpectrum(f64),

    #[error("ambiguous Bell assignment: eigenvectors tie for {0} within {1:.1e}")]
    AssignmentAmbiguity(String, f64),

    #[error("readout set is not informationally complete (rank {0} < 16)")]
    RankDeficient(usize),

    #[error("target operator has zero Frobenius norm")]
    ZeroTarget,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
