use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module of the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("derivative of order {order} is beyond finite-difference reach (analytic order {max_order})")]
    UnsupportedOrder { order: usize, max_order: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge within {panels} panels (partial value {partial}, est. error {est_error:e})")]
    NonConvergence {
        panels: usize,
        partial: Complex64,
        est_error: f64,
    },

    #[error("semi-infinite integrand has no truncation point below T = {0}")]
    Divergence(f64),

    #[error("hypothesis rejected: {0}")]
    Rejected(String),

    #[error("change of variables failed: {0}")]
    MapConstruction(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("radius {delta:e} too large ({reason}); retry with delta <= {suggested:e}")]
    RadiusTooLarge {
        delta: f64,
        suggested: f64,
        reason: String,
    },

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("expansion depth {requested} exceeds supported depth {limit}")]
    ExpansionDepth { requested: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that reject the input rather than signal a numerical failure.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::Rejected(_) | Error::Degenerate(_) | Error::OutOfDomain(_)
        )
    }

    /// True for numerical non-convergence of a solver or quadrature.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Divergence(_)
                | Error::MapConstruction(_)
                | Error::RadiusTooLarge { .. }
                | Error::InternalInconsistency(_)
        )
    }
}
