use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("coordinate x{index} at offset {offset} exceeds arity {arity}")]
    CoordinateOutOfRange {
        index: usize,
        arity: usize,
        offset: usize,
    },

    #[error("evaluation domain error: {0}")]
    EvalDomain(String),

    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("degenerate metric at {point:?}: {reason}")]
    DegenerateMetric { point: Vec<f64>, reason: String },

    #[error("non-symmetric input (asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),

    #[error("deformed metric is not positive definite at {point:?} (delta too large)")]
    DeformationNotPositive { point: Vec<f64> },

    #[error("mollification width {h:e} too large: must be below {limit:e}")]
    WidthTooLarge { h: f64, limit: f64 },

    #[error("quadrature failure: estimated error {estimate:e}")]
    Quadrature { estimate: f64 },

    #[error("focal point at t = {t}")]
    FocalPoint { t: f64 },

    #[error("energy drift {drift:e} at arc length {s} exceeds tolerance")]
    EnergyDrift { drift: f64, s: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Errors that come from the numerics rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EvalDomain(_)
                | Error::DegenerateMetric { .. }
                | Error::DeformationNotPositive { .. }
                | Error::Quadrature { .. }
                | Error::FocalPoint { .. }
                | Error::EnergyDrift { .. }
                | Error::Numerical(_)
        )
    }
}
