//! Error type shared by every module.

use crate::algebra::ValidationReport;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("algebra_core: input triple is invalid: {0}")]
    InvalidTriple(ValidationReport),
    #[error("algebra_core: Lie algebra is not solvable")]
    NotSolvable,
    #[error("algebra_core: horizontal plane does not bracket-generate the algebra")]
    NotHormander,
    #[error("algebra_core: degenerate input: {0}")]
    DegenerateInput(String),
    #[error("representation: regime does not match parameters: {0}")]
    RegimeMismatch(String),
    #[error("{context}: non-finite value encountered{}", detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default())]
    NonFinite {
        context: &'static str,
        detail: Option<String>,
    },
    #[error("heat_mc: {rejected} of {total} samples hit the covariance determinant floor")]
    TooManyRejections { rejected: usize, total: usize },
    #[error("heat_spectral: {0} did not converge")]
    NoConvergence(String),
    #[error("heat_spectral: oracle solution reaches the theta boundary (|u| = {magnitude:e} at theta = {theta})")]
    BoundaryMassLeak { magnitude: f64, theta: f64 },
    #[error("cd_verify: symbolic expression exceeded {cap} terms")]
    ClassOverflow { cap: usize },
    #[error("cd_verify: horizon T = {t} is outside the admissible window [0, {t_max})")]
    WindowExceeded { t: f64, t_max: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn non_finite(context: &'static str, detail: impl Into<String>) -> Error {
    Error::NonFinite {
        context,
        detail: Some(detail.into()),
    }
}
