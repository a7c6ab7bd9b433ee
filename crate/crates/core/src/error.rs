use alloc::boxed::Box;
use alloc::string::String;

use crate::kernels::DefinitenessCertificate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time {time} is not aligned to the grid step {step} or falls outside [{lo}, {hi}]")]
    Alignment { time: f64, step: f64, lo: f64, hi: f64 },

    #[error("times out of order: {s} > {t}")]
    Ordering { s: f64, t: f64 },

    #[error("precondition failed: {reason}")]
    Precondition {
        reason: String,
        certificate: Option<Box<DefinitenessCertificate>>,
    },

    #[error("inconsistent generator samples: max deviation {max_deviation:e} exceeds {tolerance:e}")]
    Inconsistent { max_deviation: f64, tolerance: f64 },

    #[error("{what} at {at} is within {distance:e} of the spectrum; {hint}")]
    Singular {
        what: &'static str,
        at: crate::C64,
        distance: f64,
        hint: &'static str,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(reason: impl Into<String>) -> Self {
        Error::Precondition {
            reason: reason.into(),
            certificate: None,
        }
    }
}
