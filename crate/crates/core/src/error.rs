use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Fock truncation exceeded: {leakage:.3e} population in the top levels of N = {cutoff} (tolerance {tolerance:.1e})")]
    Truncation {
        leakage: f64,
        cutoff: usize,
        tolerance: f64,
    },

    #[error("Fock cutoff {cutoff} below the safe cutoff {required}")]
    CutoffTooSmall { required: usize, cutoff: usize },

    #[error("invalid complex amplitude {0}")]
    InvalidAmplitude(String),

    #[error("invalid mass or frequency: {0}")]
    InvalidMass(String),

    #[error("sinusoid fit failed: rms residual {residual:.3e} exceeds {tolerance:.1e}")]
    Fit { residual: f64, tolerance: f64 },

    #[error("integration did not converge: step doubling changed P_e by {change:.3e} (tolerance {tolerance:.1e})")]
    Integration { change: f64, tolerance: f64 },

    #[error("state norm drifted to {norm:.12}")]
    Normalization { norm: f64 },

    #[error("grid too small: edge amplitude ratio {ratio:.3e} for level {level}")]
    GridTooSmall { level: usize, ratio: f64 },

    #[error("Hamiltonian is not symmetric (max asymmetry {0:.3e})")]
    NonHermitian(f64),

    #[error("curve grids differ and interpolation is disabled")]
    GridMismatch,

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid curve: {0}")]
    Curve(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
