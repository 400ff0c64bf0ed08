use std::fmt;

use crate::model::CaseLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A special-function argument was NaN or infinite.
    NonFiniteArgument { function: &'static str, value: f64 },
    /// The unscaled Bessel value does not fit in an `f64`.
    BesselOverflow { order: u32, x: f64 },
    /// A distribution parameter is NaN or infinite.
    NonFiniteParameter { name: &'static str, value: f64 },
    NonPositiveSigma { name: &'static str, value: f64 },
    /// |rho| >= 1 describes a singular covariance.
    CorrelationOutOfRange { rho: f64 },
    NegativeTolerance { tol: f64 },
    /// The requested closed form does not apply to the given parameters.
    CaseMismatch { requested: CaseLabel, detected: CaseLabel },
    NegativeRadius { r: f64 },
    InvalidSeriesControl { tol: f64, k_max: usize },
    /// The Weil series hit its term cap before meeting the tolerance.
    SeriesTruncated { k_max: usize, last_term: f64, partial: f64 },
    /// A curve evaluation failed at one abscissa.
    AtIndex { index: usize, source: Box<Error> },
    InvalidAbscissa { index: usize, value: f64 },
    InvalidDensity { index: usize, value: f64 },
    LengthMismatch { left: usize, right: usize },
    AbscissaMismatch { index: usize, left: f64, right: f64 },
    InvalidGrid { reason: String },
    InvalidBenchConfig { reason: String },
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::BesselOverflow { .. } | Error::SeriesTruncated { .. } => true,
            Error::AtIndex { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn at(self, index: usize) -> Error {
        Error::AtIndex { index, source: Box::new(self) }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFiniteArgument { function, value } => {
                write!(f, "{function}: argument must be finite, got {value}")
            }
            Error::BesselOverflow { order, x } => {
                write!(f, "I_{order}({x}) overflows f64; use the scaled variant")
            }
            Error::NonFiniteParameter { name, value } => {
                write!(f, "parameter {name} must be finite, got {value}")
            }
            Error::NonPositiveSigma { name, value } => {
                write!(f, "parameter {name} must be > 0, got {value}")
            }
            Error::CorrelationOutOfRange { rho } => {
                write!(f, "correlation must satisfy |rho| < 1, got {rho}")
            }
            Error::NegativeTolerance { tol } => {
                write!(f, "classification tolerance must be >= 0, got {tol}")
            }
            Error::CaseMismatch { requested, detected } => write!(
                f,
                "case ({}) does not apply to these parameters (classified as ({}) {})",
                requested.letter(),
                detected.letter(),
                detected.description()
            ),
            Error::NegativeRadius { r } => write!(f, "radius must be finite and >= 0, got {r}"),
            Error::InvalidSeriesControl { tol, k_max } => write!(
                f,
                "series control needs tol > 0 and k_max >= 1, got tol={tol}, k_max={k_max}"
            ),
            Error::SeriesTruncated { k_max, last_term, partial } => write!(
                f,
                "Weil series not converged after {k_max} terms \
                 (last term {last_term:e}, partial sum {partial:e})"
            ),
            Error::AtIndex { index, source } => write!(f, "at index {index}: {source}"),
            Error::InvalidAbscissa { index, value } => write!(
                f,
                "abscissa must be finite and strictly increasing (index {index}, value {value})"
            ),
            Error::InvalidDensity { index, value } => {
                write!(f, "density must be finite and >= 0 (index {index}, value {value})")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::AbscissaMismatch { index, left, right } => {
                write!(f, "abscissas differ at index {index}: {left} vs {right}")
            }
            Error::InvalidGrid { reason } => write!(f, "invalid polar grid: {reason}"),
            Error::InvalidBenchConfig { reason } => write!(f, "invalid benchmark config: {reason}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::AtIndex { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
