//! Left-invariant sub-Riemannian structures on three-dimensional solvable Lie
//! groups.
//!
//! The crate covers the full pipeline from raw structure constants to heat
//! kernels and curvature checks:
//!
//! * [`algebra`] validates a triple `(g, H, <.,.>)`, builds the canonical basis
//!   `X, Y, Z` with parameters `(alpha, beta)` and reports the regime.
//! * [`representation`] realises each regime as a group of 3x3 affine matrices
//!   in coordinates `(theta, x, y)`.
//! * [`heat_mc`] estimates the subelliptic heat kernel by Brownian-bridge Monte
//!   Carlo and samples the diffusion itself.
//! * [`heat_spectral`] provides Mathieu functions, the SE(2) spectral kernel and
//!   a Fourier/Crank-Nicolson oracle valid in every regime.
//! * [`cd_verify`] evaluates the carre du champ operators exactly and checks the
//!   curvature-dimension inequality and the semigroup gradient bounds.
//!
//! ```
//! use solvkernel::{algebra::canonicalize, presets::Preset, tolerance::ToleranceProfile};
//!
//! let triple = Preset::Se2.triple();
//! let c = canonicalize(&triple, &ToleranceProfile::default()).unwrap();
//! assert!((c.form.alpha + 1.0).abs() < 1e-12);
//! assert_eq!(c.regime.tag(), "DeltaNeg");
//! ```

pub mod algebra;
pub mod cd_verify;
pub mod error;
pub mod heat_mc;
pub mod heat_spectral;
pub mod linalg;
pub mod presets;
pub mod quadrature;
pub mod representation;
pub mod rng;
pub mod tolerance;

pub use error::{Error, Result};
