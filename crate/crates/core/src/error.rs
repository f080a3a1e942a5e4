use thiserror::Error;

/// Failures raised by the numerical routines and the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidInput { name: &'static str, reason: String },

    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("no sign change on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("quadrature tolerance not met (best estimate {estimate})")]
    ToleranceNotMet { estimate: f64 },

    #[error("prior is not nice: {0}")]
    NotNice(String),

    #[error("degenerate divergence {value:e} for shift {h}")]
    DegenerateDivergence { value: f64, h: f64 },

    #[error("degenerate kernel: |K^(s)(0)| = 0")]
    DegenerateKernel,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ToleranceNotMet { .. } | Error::DegenerateDivergence { .. } | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
