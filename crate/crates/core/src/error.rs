use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration value is outside its allowed domain. `name` is the
    /// parameter as the user would spell it (e.g. `pump.fwhm_thz`).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("grid too narrow: span {span} THz must cover at least {required} THz")]
    GridTooNarrow { span: f64, required: f64 },

    #[error(
        "grid too coarse: spacing {spacing} THz must be below {limit} THz \
         to resolve spectral features of {feature} THz"
    )]
    GridTooCoarse { spacing: f64, limit: f64, feature: f64 },

    #[error("invalid bin weights: {0}")]
    InvalidWeights(String),

    #[error("pump grid [{pump_min}, {pump_max}] THz does not cover the joint range [{needed_min}, {needed_max}] THz")]
    PumpCoverage {
        pump_min: f64,
        pump_max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    #[error("phase source [{min}, {max}] THz does not cover the required range [{needed_min}, {needed_max}] THz")]
    PhaseCoverage {
        min: f64,
        max: f64,
        needed_min: f64,
        needed_max: f64,
    },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("value {value} outside the domain of {operation}: {reason}")]
    Domain {
        operation: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid point-spread function: {0}")]
    InvalidPsf(String),

    #[error("empty intensity: {0}")]
    EmptyIntensity(String),

    #[error("statistics degenerate: {0}")]
    Degenerate(String),

    #[error("cannot keep {keep} modes from a decomposition of rank {rank}")]
    KeepExceedsRank { keep: usize, rank: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::DegenerateGrid(_)
                | Error::GridTooNarrow { .. }
                | Error::GridTooCoarse { .. }
                | Error::InvalidWeights(_)
                | Error::PumpCoverage { .. }
                | Error::PhaseCoverage { .. }
                | Error::InvalidPsf(_)
                | Error::KeepExceedsRank { .. }
        )
    }
}
