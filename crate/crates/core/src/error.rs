use thiserror::Error;

/// Errors raised by the sphere-signal routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bandlimit {found}: at least {min} required")]
    InvalidBandlimit { found: usize, min: usize },
    #[error("invalid order m={m} for degree l={l}")]
    InvalidOrder { l: usize, m: isize },
    #[error("grid resolves bandlimit {exact} exactly, {requested} requested")]
    UndersampledGrid { requested: usize, exact: usize },
    #[error("bandlimit mismatch: expected {expected}, found {found}")]
    BandlimitMismatch { expected: usize, found: usize },
    #[error("invalid scale range j1={j1} > j2={j2}")]
    InvalidScaleRange { j1: usize, j2: usize },
    #[error("scale {j} outside [{j1}, {j2}]")]
    ScaleOutOfRange { j: usize, j1: usize, j2: usize },
    #[error("dilation parameter must exceed 1, got {0}")]
    InvalidDilation(f64),
    #[error("directionality row l={l} has squared norm {norm_sq}, expected 1")]
    NotUnitNorm { l: usize, norm_sq: f64 },
    #[error("mode mismatch: {0}")]
    ModeMismatch(&'static str),
    #[error("unsupported mode: {0}")]
    UnsupportedMode(&'static str),
    #[error("covariance block l={l} is not Hermitian (deviation {deviation:e})")]
    NotHermitian { l: usize, deviation: f64 },
    #[error("covariance block l={l} is not positive semi-definite (eigenvalue {eigenvalue:e})")]
    NotPsd { l: usize, eigenvalue: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative variance {value} at (l={l}, m={m})")]
    NegativeVariance { l: usize, m: isize, value: f64 },
    #[error("kernel parameter kappa={0} outside [0, 1]")]
    KappaOutOfRange(f64),
    #[error("SNR undefined for a zero source signal")]
    UndefinedSnr,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
