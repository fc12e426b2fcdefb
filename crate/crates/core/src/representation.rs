//! Affine matrix realisations of the five regimes.
//!
//! Every regime is realised inside the group of 3x3 matrices
//!
//! ```text
//! g(theta, x, y) = [ exp(theta A)  (x, y)^T ]
//!                  [      0            1    ]
//! ```
//!
//! with the Lie algebra spanned by
//!
//! ```text
//! X = [ A 0 ]    Y = [ 0 ybar ]    R = [ 0 rbar ]
//!     [ 0 0 ]        [ 0  0   ]        [ 0  0   ]
//! ```
//!
//! The left-invariant fields are `X = d/dtheta`, `Y = (exp(theta A) ybar) . grad`
//! and `R = (exp(theta A) rbar) . grad` where `grad = (d/dx, d/dy)`.
//!
//! | regime | `A` | `ybar` | `rbar` |
//! |---|---|---|---|
//! | Heisenberg | `[[0,1],[0,0]]` | `(0, 1)` | `(1, 0)` |
//! | rank one, `beta > 0` | `diag(beta, 0)` | `(1, 1)` | `(0, -beta)` |
//! | `delta > 0` | `diag(l1, l2)` | `(-l1, l2)` | `(-alpha, alpha)` |
//! | `delta < 0` | `[[rho,-omega],[omega,rho]]` | `(-omega, rho)` | `(0, -(rho^2+omega^2))` |
//! | `delta = 0` | `[[l,1],[0,l]]` | `(l-1, -l)` | `(-l^2, l^2)` |

use serde::{Deserialize, Serialize};

use crate::algebra::{CanonicalForm, Params, Regime};
use crate::error::{Error, Result};
use crate::linalg::{
    commutator3, mat2_add, mat2_max_abs, mat2_mul, mat2_scale, mat2_vec, mat3_lincomb, mat3_max_abs, Mat2, Mat3,
    Vec2, I2,
};
use crate::tolerance::ToleranceProfile;

/// A point of the group in coordinates `(theta, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub theta: f64,
    pub x: f64,
    pub y: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint {
        theta: 0.0,
        x: 0.0,
        y: 0.0,
    };

    pub fn new(theta: f64, x: f64, y: f64) -> Self {
        Self { theta, x, y }
    }

    pub fn v(&self) -> Vec2 {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

/// One of the three frame fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    X,
    Y,
    R,
}

/// Coefficients of `d/dx, d/dy` in `Y` and `R` at a given `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldCoefficients {
    pub y_coeff: Vec2,
    pub r_coeff: Vec2,
}

/// Central-difference stencil used by [`AffineRep::apply_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifference {
    pub step: f64,
    /// 2 or 4.
    pub order: u8,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self { step: 1e-4, order: 4 }
    }
}

/// `exp(theta A)` in closed form for the regime's own `A`.
pub fn exp2x2(regime: &Regime, theta: f64) -> Mat2 {
    match *regime {
        Regime::Rank1Heisenberg => [[1.0, theta], [0.0, 1.0]],
        Regime::Rank1BetaPos { beta } => [[(beta * theta).exp(), 0.0], [0.0, 1.0]],
        Regime::DeltaPos { lambda1, lambda2 } => [[(lambda1 * theta).exp(), 0.0], [0.0, (lambda2 * theta).exp()]],
        Regime::DeltaNeg { rho, omega, .. } => {
            let e = (rho * theta).exp();
            let (s, c) = (omega * theta).sin_cos();
            [[e * c, -e * s], [e * s, e * c]]
        }
        Regime::DeltaZero { lambda } => {
            let e = (lambda * theta).exp();
            [[e, theta * e], [0.0, e]]
        }
    }
}

/// Matrix exponential by scaling and squaring of a degree-12 Taylor
/// polynomial. Used to cross-check the closed forms.
pub fn expm2_series(m: &Mat2) -> Mat2 {
    let norm = mat2_max_abs(m) * 2.0;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = mat2_scale(m, scale);
    let mut term = I2;
    let mut sum = I2;
    for k in 1..=12 {
        term = mat2_scale(&mat2_mul(&term, &a), 1.0 / k as f64);
        sum = mat2_add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = mat2_mul(&sum, &sum);
    }
    sum
}

/// The affine representation of one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineRep {
    pub regime: Regime,
    pub params: Params,
    pub a: Mat2,
    pub ybar: Vec2,
    pub rbar: Vec2,
}

impl AffineRep {
    /// Builds the representation from a regime; the parameters are those the
    /// regime implies.
    pub fn new(regime: Regime) -> Self {
        let params = regime.params();
        let (a, ybar, rbar) = match regime {
            Regime::Rank1Heisenberg => ([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0], [1.0, 0.0]),
            Regime::Rank1BetaPos { beta } => ([[beta, 0.0], [0.0, 0.0]], [1.0, 1.0], [0.0, -beta]),
            Regime::DeltaPos { lambda1, lambda2 } => (
                [[lambda1, 0.0], [0.0, lambda2]],
                [-lambda1, lambda2],
                [-params.alpha, params.alpha],
            ),
            Regime::DeltaNeg { rho, omega, .. } => (
                [[rho, -omega], [omega, rho]],
                [-omega, rho],
                [0.0, -(rho * rho + omega * omega)],
            ),
            Regime::DeltaZero { lambda } => (
                [[lambda, 1.0], [0.0, lambda]],
                [lambda - 1.0, -lambda],
                [-lambda * lambda, lambda * lambda],
            ),
        };
        Self {
            regime,
            params,
            a,
            ybar,
            rbar,
        }
    }

    /// Builds the representation for a canonical form, checking that the
    /// regime agrees with the form's parameters.
    pub fn build(form: &CanonicalForm, regime: &Regime, tol: &ToleranceProfile) -> Result<Self> {
        let implied = regime.params();
        let scale = form.alpha.abs().max(form.beta.abs()).max(1.0);
        let same_rank = regime.is_rank_one() == (form.derived_rank == 1);
        let close = (implied.alpha - form.alpha).abs() <= tol.parameter_match * scale
            && (implied.beta - form.beta).abs() <= tol.parameter_match * scale;
        if !(same_rank && close) {
            return Err(Error::RegimeMismatch(format!(
                "regime {} implies (alpha, beta) = ({}, {}) but the form has ({}, {})",
                regime.tag(),
                implied.alpha,
                implied.beta,
                form.alpha,
                form.beta
            )));
        }
        Ok(Self::new(*regime))
    }

    pub fn from_params(p: Params, tol: &ToleranceProfile) -> Result<Self> {
        Ok(Self::new(Regime::from_params(p, tol)?))
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn mat_x(&self) -> Mat3 {
        let a = &self.a;
        [[a[0][0], a[0][1], 0.0], [a[1][0], a[1][1], 0.0], [0.0, 0.0, 0.0]]
    }

    pub fn mat_y(&self) -> Mat3 {
        [[0.0, 0.0, self.ybar[0]], [0.0, 0.0, self.ybar[1]], [0.0, 0.0, 0.0]]
    }

    pub fn mat_r(&self) -> Mat3 {
        [[0.0, 0.0, self.rbar[0]], [0.0, 0.0, self.rbar[1]], [0.0, 0.0, 0.0]]
    }

    /// Largest entry of the residuals of `[X,Y] = beta Y + R`,
    /// `[X,R] = alpha Y` and `[Y,R] = 0` among the matrices.
    pub fn commutator_residual(&self) -> f64 {
        let (x, y, r) = (self.mat_x(), self.mat_y(), self.mat_r());
        let Params { alpha, beta } = self.params;
        let e1 = mat3_lincomb(&[(1.0, &commutator3(&x, &y)), (-beta, &y), (-1.0, &r)]);
        let e2 = mat3_lincomb(&[(1.0, &commutator3(&x, &r)), (-alpha, &y)]);
        let e3 = commutator3(&y, &r);
        mat3_max_abs(&e1).max(mat3_max_abs(&e2)).max(mat3_max_abs(&e3))
    }

    pub fn exp_a(&self, theta: f64) -> Mat2 {
        exp2x2(&self.regime, theta)
    }

    pub fn field_coeffs(&self, theta: f64) -> FieldCoefficients {
        let m = self.exp_a(theta);
        FieldCoefficients {
            y_coeff: mat2_vec(&m, &self.ybar),
            r_coeff: mat2_vec(&m, &self.rbar),
        }
    }

    pub fn group_mul(&self, p: &GroupPoint, q: &GroupPoint) -> GroupPoint {
        let w = mat2_vec(&self.exp_a(p.theta), &q.v());
        GroupPoint::new(p.theta + q.theta, p.x + w[0], p.y + w[1])
    }

    pub fn group_inv(&self, p: &GroupPoint) -> GroupPoint {
        let w = mat2_vec(&self.exp_a(-p.theta), &p.v());
        GroupPoint::new(-p.theta, -w[0], -w[1])
    }

    pub fn to_matrix(&self, p: &GroupPoint) -> Mat3 {
        let m = self.exp_a(p.theta);
        [[m[0][0], m[0][1], p.x], [m[1][0], m[1][1], p.y], [0.0, 0.0, 1.0]]
    }

    /// `p exp(s F)`.
    pub fn flow(&self, p: &GroupPoint, field: Field, s: f64) -> GroupPoint {
        let step = match field {
            Field::X => GroupPoint::new(s, 0.0, 0.0),
            Field::Y => GroupPoint::new(0.0, s * self.ybar[0], s * self.ybar[1]),
            Field::R => GroupPoint::new(0.0, s * self.rbar[0], s * self.rbar[1]),
        };
        self.group_mul(p, &step)
    }

    /// Left Haar density with respect to `dtheta dx dy`, normalised so that
    /// the frame `(X, Y, R)` has unit volume at the identity.
    pub fn haar_density(&self, theta: f64) -> f64 {
        let det = self.ybar[0] * self.rbar[1] - self.ybar[1] * self.rbar[0];
        (-self.params.beta * theta).exp() / det.abs()
    }

    /// Applies the word `W1 W2 ... Wn` (so `Wn` acts first) to `f` at `p` by
    /// nested central differences along the group flows.
    pub fn apply_operator(
        &self,
        word: &[Field],
        f: &dyn Fn(&GroupPoint) -> f64,
        p: &GroupPoint,
        fd: &FiniteDifference,
    ) -> Result<f64> {
        let Some((&first, rest)) = word.split_first() else {
            let v = f(p);
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(crate::error::non_finite("representation", format!("f({p:?}) = {v}")))
            };
        };
        let h = fd.step;
        let at = |s: f64| self.apply_operator(rest, f, &self.flow(p, first, s), fd);
        match fd.order {
            2 => Ok((at(h)? - at(-h)?) / (2.0 * h)),
            4 => Ok((-at(2.0 * h)? + 8.0 * at(h)? - 8.0 * at(-h)? + at(-2.0 * h)?) / (12.0 * h)),
            o => Err(Error::InvalidArgument(format!("unsupported difference order {o}"))),
        }
    }
}
