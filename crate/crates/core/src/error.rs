//! Crate-wide error type.

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid mode set: {0}")]
    InvalidModes(String),

    #[error("squeezing parameter must satisfy |xi| < 1, got |xi| = {modulus}")]
    InvalidSqueezing { modulus: f64 },

    #[error("invalid spectral density: {0}")]
    InvalidSpectralDensity(String),

    #[error(
        "frequency comb recurrence time {recurrence:.6} does not exceed the grid horizon \
         {horizon:.6}; increase the mode count (finer comb) or shorten the grid"
    )]
    RecurrenceTime { recurrence: f64, horizon: f64 },

    #[error("inputs are defined on different time grids")]
    GridMismatch,

    #[error(
        "augmented covariance is not positive semidefinite: most negative eigenvalue \
         {min_eigenvalue:.3e} below tolerance -{tolerance:.3e}; the alpha/eta pair violates \
         the positivity condition required of a Gaussian process"
    )]
    IndefiniteCovariance { min_eigenvalue: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not hermitian within tolerance (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("density matrix trace deviates from one by {0:.3e}")]
    TraceDeviation(f64),

    #[error("initial state must be normalized; |norm - 1| = {0:.3e}")]
    UnnormalizedState(f64),

    #[error("local hamiltonian on coupled qubit {qubit} does not commute with sigma_z")]
    NonCommutingHamiltonian { qubit: usize },

    #[error("system size {n} qubits exceeds the configured cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },

    #[error("too many bath modes for this operation: {n} exceeds the cap of {cap}")]
    TooManyModes { n: usize, cap: usize },

    #[error(
        "Bargmann recurrence overflow at |z| = {z_abs:.3e}; reduce the quadrature domain or \
         the Fock truncation"
    )]
    ProjectionOverflow { z_abs: f64 },

    #[error("initial state has zero entanglement; the scaling ratio is undefined")]
    ZeroInitialEntanglement,

    #[error("time integration failed: {0}")]
    Integration(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
