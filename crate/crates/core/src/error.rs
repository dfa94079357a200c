use thiserror::Error;

use crate::grassmann::Parity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator count mismatch: {left} vs {right}")]
    GeneratorMismatch { left: usize, right: usize },

    #[error("generator count {0} exceeds the supported maximum of 63")]
    TooManyGenerators(usize),

    #[error("generator index {index} out of range for {generators} generators")]
    GeneratorOutOfRange { index: usize, generators: usize },

    #[error("integration over {requested} generators but only {available} exist")]
    TooManyIntegrationGenerators { requested: usize, available: usize },

    #[error("expected {expected:?} quantity for {what}, found {found:?}")]
    Parity {
        what: &'static str,
        expected: Parity,
        found: Parity,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("axis {axis} out of range for a {dims}-dimensional grid")]
    AxisOutOfRange { axis: usize, dims: usize },

    #[error("odd index {index} out of range for odd dimension {odd_dim}")]
    OddIndexOutOfRange { index: usize, odd_dim: usize },

    #[error("body map is not an orientation preserving diffeomorphism (min derivative {0})")]
    NonInvertibleBodyMap(f64),

    #[error("element with vanishing body is not invertible")]
    NotInvertible,

    #[error("Weyl factor must have positive body everywhere (min {0})")]
    NonPositiveWeyl(f64),

    #[error("vector field is not periodic on the torus: {0}")]
    NotPeriodic(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("calibration is underdetermined: every sign assignment gives the same residual")]
    CalibrationUnderdetermined,

    #[error("calibration failed: best residual {best} exceeds {tolerance}")]
    CalibrationFailed { best: f64, tolerance: f64 },

    #[error("gradient flow diverged at step {step} (energy {energy})")]
    FlowDiverged { step: usize, energy: f64 },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
