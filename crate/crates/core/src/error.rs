use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Pointwise singularities (vanishing curvature, a torsion zero under the
/// binormal formulas, ...) are reported through validity masks; the variants
/// here cover structural failures only.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("grid is not uniform (sample {index} deviates by {deviation:e})")]
    NonUniformGrid { index: usize, deviation: f64 },
    #[error("grid must be strictly increasing (violated at sample {index})")]
    NonIncreasingGrid { index: usize },
    #[error("length mismatch: grid has {grid} samples, data has {data}")]
    LengthMismatch { grid: usize, data: usize },
    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },
    #[error("range [{from}, {to}] is outside the grid span [{start}, {end}]")]
    RangeOutOfGrid { from: f64, to: f64, start: f64, end: f64 },
    #[error("integration range crosses an invalid sample at index {index}")]
    MaskedRegion { index: usize },
    #[error("speed vanishes near sample {index} (|dp/dt| = {speed:e})")]
    SingularSpeed { index: usize, speed: f64 },
    #[error("curve is not unit speed: |dp/ds| - 1 = {deviation:e} at sample {index}")]
    NotUnitSpeed { index: usize, deviation: f64 },
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("frame is not orthonormal (Gram deviation {deviation:e})")]
    NonOrthonormalSeed { deviation: f64 },
    #[error("frame is not right-handed or orthonormal (Gram deviation {deviation:e}, det {det})")]
    InvalidFrame { deviation: f64, det: f64 },
    #[error("negative curvature {value} at sample {index}")]
    NegativeKappa { index: usize, value: f64 },
    #[error("indicatrix is masked on every sample")]
    MaskedEverywhere,
    #[error("|f| is below the binormal floor on every sample (torsion vanishes)")]
    FFloorViolation,
    #[error("|psi_{level}'| vanishes on more than half of the samples")]
    VanishingDerivative { level: usize },
    #[error("slant profile holds no valid level")]
    EmptyProfile,
    #[error("psi_{{k+1}} and psi_{{k+2}} are parallel at every sample (k = {level})")]
    CrossProductDegenerate { level: usize },
    #[error("level {level} exceeds the supported maximum {max}")]
    LevelTooHigh { level: usize, max: usize },
    #[error("invalid angle {0}: expected a value in (0, pi)")]
    InvalidAngle(f64),
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error("slant ODE exceeded |f| = {cap} and no usable span remains around s = {center}")]
    OdeBlowUp { cap: f64, center: f64 },
    #[error("quadric fit is degenerate: {0}")]
    FitDegenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
