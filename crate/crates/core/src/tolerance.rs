//! Numerical tolerances used by classification.

use serde::{Deserialize, Serialize};

/// Every threshold consulted by [`crate::algebra::validate`] and
/// [`crate::algebra::canonicalize`].
///
/// Rank decisions compare singular values against `rank` times the largest
/// singular value of the same matrix. The remaining entries are relative to
/// the natural scale of the quantity being tested (the norm of the structure
/// constants, the size of the metric, or the magnitude of the parameters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub rank: f64,
    pub antisymmetry: f64,
    pub jacobi: f64,
    pub metric_symmetry: f64,
    pub metric_eigen: f64,
    pub hormander: f64,
    pub canonical_residual: f64,
    pub discriminant: f64,
    pub parameter_match: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            rank: 1e-10,
            antisymmetry: 1e-12,
            jacobi: 1e-12,
            metric_symmetry: 1e-12,
            metric_eigen: 1e-12,
            hormander: 1e-10,
            canonical_residual: 1e-9,
            discriminant: 1e-8,
            parameter_match: 1e-9,
        }
    }
}
