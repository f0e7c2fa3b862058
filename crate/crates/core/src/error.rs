use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
///
/// Tolerance violations are hard errors; nothing is silently repaired.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("density matrix is not positive: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("partial trace needs at least two tensor factors, got {factors}")]
    SingleFactor { factors: usize },

    #[error("factor index {index} out of range for {factors} factors")]
    FactorIndex { index: usize, factors: usize },

    #[error("observable `{label}` is singular at the requested state: {detail}")]
    Singular { label: String, detail: String },

    #[error("imaginary residual {residual:.3e} in a quantity that must be real")]
    ComplexResidual { residual: f64 },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: String, detail: String },

    #[error(
        "norm drift {drift:.3e} at t = {time:.6} exceeds the budget {budget:.3e} \
         (step {step})"
    )]
    NormDrift {
        drift: f64,
        budget: f64,
        time: f64,
        step: usize,
    },

    #[error("integration became unstable at t = {time:.6}: {detail}")]
    Unstable { time: f64, detail: String },

    #[error("population {population:.3e} leaked into the top Fock level (n_max = {n_max}) at t = {time:.6}")]
    TruncationLeak { population: f64, n_max: usize, time: f64 },

    #[error("frequency resolution insufficient: need a record of at least {required_duration:.6} time units, have {duration:.6}")]
    Resolution { required_duration: f64, duration: f64 },

    #[error("series too coarse: {0}")]
    TooCoarse(String),

    #[error("probability method is singular: {0}")]
    SingularMethod(String),

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
