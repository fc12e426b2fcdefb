//! Carre du champ calculus and inequality checks.
//!
//! The frame fields act exactly on the class [`Expr`] of finite sums of
//! `x^a y^b theta^k e^(mu theta) trig(nu theta)`; in every regime the field
//! coefficients lie in this class, so `X`, `Y`, `R` and `L` never leave it.
//! From the exact forms
//!
//! ```text
//! Gamma(f)     = (Xf)^2 + (Yf)^2          Gamma^R(f)   = (Rf)^2
//! Gamma_2(f)   = 1/2 L Gamma(f) - Gamma(f, Lf)
//! Gamma_2^R(f) = 1/2 L Gamma^R(f) - Gamma^R(f, Lf)
//! ```
//!
//! [`CarreResult::cd_residual`] evaluates the curvature-dimension residual
//! `Gamma_2 + nu Gamma_2^R - 1/2 (Lf)^2 - 1/2 (1 - nu^2 alpha^2) Gamma^R + (alpha^+ + beta^2 + 1/nu) Gamma`,
//! This stated form is non-negative when `alpha beta = 0` but can be negative
//! otherwise: completing the square leaves a cross term `-2 nu alpha beta (Rf)(Yf)`
//! unaccounted for. [`CdForm::Corrected`] adds the bound
//! `|nu alpha beta| (Gamma + Gamma^R)` of that term and holds in every regime.
//!
//! The semigroup inequalities are checked by Monte Carlo on compactly
//! supported [`Bump`] functions, with `Gamma(P_T f)` obtained from central
//! differences along the group flows that reuse the same diffusion paths.
//!
//! ```
//! use solvkernel::algebra::Params;
//! use solvkernel::cd_verify::{carre, Expr, FieldCalculus};
//! use solvkernel::representation::{AffineRep, GroupPoint};
//! use solvkernel::tolerance::ToleranceProfile;
//!
//! let rep = AffineRep::from_params(Params::new(1.0, 1.0), &ToleranceProfile::default()).unwrap();
//! let calc = FieldCalculus::new(&rep);
//! let c = carre(&calc, &Expr::theta(), &GroupPoint::new(0.2, 1.0, -1.0)).unwrap();
//! // alpha^+ + beta^2 / 2 + 1 / nu at nu = 1
//! assert!((c.cd_residual(1.0, &rep.params) - 2.5).abs() < 1e-14);
//! ```

pub mod bounds;
pub mod calculus;
pub mod expr;
pub mod smooth;
pub mod sweep;

pub use bounds::{
    gradient_bound_check, gradient_coefficient, reverse_poincare_check, window_max, BoundKind, BoundReport, BoundSpec,
};
pub use calculus::{carre, cd_residual, random_point, test_suite, CarreForms, CdForm, CarreResult, FieldCalculus, TestFunction};
pub use expr::{Expr, Monomial, Trig, DEFAULT_TERM_CAP};
pub use smooth::{frame_derivatives, gamma_pair, Bump, CompiledExpr, SmoothFunction};
pub use sweep::{cd_sweep, cd_sweep_functions, sweep_points, CdReport, CdResidual, CdSettings, FunctionSummary};
