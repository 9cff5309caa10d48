use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::criteria::CriterionReport;
use crate::C64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("singular jacobian (smallest pivot {min_pivot:e})")]
    SingularJacobian { min_pivot: f64 },

    #[error("degree {degree} exceeds the composition cap {cap}")]
    DegreeCap { degree: u32, cap: u32 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, point: Vec<C64>, reason: String },

    #[error("step size underflow at t = {t}; tolerance unreachable")]
    ToleranceUnreachable { t: f64 },

    #[error("piece {piece} rejected: generator is not spirallike ({})", report.summary())]
    SpirallikeRejected { piece: usize, report: Box<CriterionReport> },

    #[error("no admissible candidate index")]
    NoAdmissibleIndex,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolated(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, got })
        }
    }
}
