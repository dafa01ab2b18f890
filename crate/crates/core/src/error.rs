use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Hermitian symmetry violated at j = {index}: relative defect {defect:e}")]
    SymmetryViolation { index: i64, defect: f64 },

    #[error("multiplier overflow risk: sigma * xi_max = {exponent} exceeds {limit}")]
    OverflowRisk { exponent: f64, limit: f64 },

    #[error("non-finite or exploding coefficient detected at t = {time}")]
    BlowupDetected { time: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last distance {last_distance:e})")]
    NoConvergence {
        iterations: usize,
        last_distance: f64,
        diagnostics: Box<crate::evolution::PicardDiagnostics>,
    },

    #[error("polynomial identity violated for k = {k} at triad ({xi1}, {xi2}, {xi3})")]
    IdentityViolation {
        k: u32,
        xi1: String,
        xi2: String,
        xi3: String,
    },

    #[error("series did not reach geometric decay by k = {k_max}")]
    SeriesDivergence { k_max: u32 },

    #[error("cross-check failed: physical-space {physical:e} vs Fourier-triad {fourier:e}")]
    CrossCheckFailure { physical: f64, fourier: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("spectrum too thin: {usable} usable modes, need at least {required}")]
    SpectrumTooThin { usable: usize, required: usize },

    #[error("no radius fit: every sample was rejected")]
    NoFit,

    #[error("calibration file: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
