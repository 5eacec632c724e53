use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("singular propagator at omega = {omega}")]
    Singular { omega: f64 },

    #[error("final value extrapolation did not converge (spread {spread:.3e})")]
    NonConvergentLimit { spread: f64 },

    #[error("inverse transform accuracy budget exceeded: estimated error {estimate:.3e} > {tolerance:.3e} at T = {t_max}")]
    AccuracyBudget {
        estimate: f64,
        tolerance: f64,
        t_max: f64,
    },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("reference spectrum vanishes at {at} where the spectrum is positive")]
    ZeroReference { at: f64 },

    #[error("spectrum has significant negative values (min {min:.3e} relative to peak)")]
    NegativeSpectrum { min: f64 },

    #[error("no relaxing eigenvalue: generator is purely unitary")]
    NoGap,

    #[error("steady state rejected: {0}")]
    SteadyState(String),

    #[error("Fock truncation too small: top-level population {population:.3e}")]
    Truncation { population: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
