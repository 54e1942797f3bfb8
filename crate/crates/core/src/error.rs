use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("feed gain exponent alpha = {0} must be greater than 1")]
    InvalidAlpha(f64),

    #[error("Nakagami shape m = {0} must be at least 0.5")]
    InvalidShape(f64),

    #[error("moment order {0} is outside 1..=4")]
    InvalidOrder(u32),

    #[error("dimension mismatch: grid has {grid} elements, draw has {draw}")]
    DimensionMismatch { grid: usize, draw: usize },

    #[error(
        "quadrature on [{x0}, {x1}] x [{y0}, {y1}] did not converge (relative change {rel_change:.3e})"
    )]
    QuadratureNotConverged {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        rel_change: f64,
    },

    #[error("degenerate distribution: E|h|^4 = {e_h4} does not exceed (E|h|^2)^2 = {e_h2_sq}")]
    DegenerateDistribution { e_h4: f64, e_h2_sq: f64 },

    #[error("inverse channel moment is not integrable: {0}")]
    NonIntegrableInverseMoment(String),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::DegenerateDistribution { .. }
                | Error::NonIntegrableInverseMoment(_)
        )
    }
}
