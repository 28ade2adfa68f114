use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::formlang::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{source} at point {point:?}")]
    Evaluation { source: EvalError, point: Vec<f64> },
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("gauge function is singular at {point:?} (|det| = {det:e})")]
    SingularGauge { point: Vec<f64>, det: f64 },
    #[error("form is not periodic: endpoint gap {gap:e}")]
    NotPeriodic { gap: f64 },
    #[error("connection is not flat: curvature residual {residual:e} exceeds {tolerance:e}")]
    NotIntegrable { residual: f64, tolerance: f64 },
    #[error("generator `{0}` has no assigned value")]
    UnassignedGenerator(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn eval(source: EvalError, point: &[f64]) -> Self {
        match source {
            EvalError::Arity { expected, got } => {
                Error::Dimension(format!("expected a point with {expected} coordinates, got {got}"))
            }
            source => Error::Evaluation {
                source,
                point: point.to_vec(),
            },
        }
    }

    /// True for failures caused by the numbers rather than the input's shape:
    /// singularities, leaving the logarithm's domain, lack of flatness.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::Algebra(e) => !matches!(
                e,
                AlgebraError::NotSquare { .. } | AlgebraError::DimensionMismatch { .. }
            ),
            Error::Evaluation { .. }
            | Error::SingularGauge { .. }
            | Error::NotPeriodic { .. }
            | Error::NotIntegrable { .. } => true,
            Error::Parse(_) | Error::Dimension(_) | Error::UnassignedGenerator(_) | Error::InvalidArgument(_) => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
