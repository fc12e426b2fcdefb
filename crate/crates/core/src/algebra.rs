//! Structure constants, validation and the canonical form `(alpha, beta)`.
//!
//! A sub-Riemannian triple is a three-dimensional solvable Lie algebra `g`,
//! a two-plane `H` that bracket-generates `g`, and an inner product on `H`.
//! [`canonicalize`] finds an orthonormal pair `X, Y` in `H` and `Z = [X, Y]`
//! such that
//!
//! ```text
//! [X, Y] = Z,    [X, Z] = alpha Y + beta Z,    [Y, Z] = 0,    beta >= 0,
//! ```
//!
//! and attaches the regime (sign of the discriminant `beta^2 + 4 alpha`) and
//! the constants of the associated CR geometry.

use std::fmt;

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy3, dot3, norm3, scale3, Mat2, Mat3, Vec3};
use crate::tolerance::ToleranceProfile;

/// Structure constants `c[k][i][j]` with `[e_i, e_j] = sum_k c[k][i][j] e_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebra3 {
    pub c: [[[f64; 3]; 3]; 3],
}

impl LieAlgebra3 {
    pub fn new(c: [[[f64; 3]; 3]; 3]) -> Self {
        Self { c }
    }

    /// Builds the algebra from the three basic brackets
    /// `[e0, e1]`, `[e0, e2]` and `[e1, e2]`.
    pub fn from_brackets(b01: Vec3, b02: Vec3, b12: Vec3) -> Self {
        let mut c = [[[0.0; 3]; 3]; 3];
        for k in 0..3 {
            c[k][0][1] = b01[k];
            c[k][1][0] = -b01[k];
            c[k][0][2] = b02[k];
            c[k][2][0] = -b02[k];
            c[k][1][2] = b12[k];
            c[k][2][1] = -b12[k];
        }
        Self { c }
    }

    /// The canonical algebra in the basis `e0 = X, e1 = Y, e2 = Z`.
    pub fn canonical(alpha: f64, beta: f64) -> Self {
        Self::from_brackets([0.0, 0.0, 1.0], [0.0, alpha, beta], [0.0; 3])
    }

    pub fn bracket(&self, u: &Vec3, v: &Vec3) -> Vec3 {
        let mut w = [0.0; 3];
        for (k, wk) in w.iter_mut().enumerate() {
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    s += self.c[k][i][j] * u[i] * v[j];
                }
            }
            *wk = s;
        }
        w
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec3 {
        [self.c[0][i][j], self.c[1][i][j], self.c[2][i][j]]
    }

    /// Frobenius norm of the structure constants.
    pub fn scale(&self) -> f64 {
        self.c.iter().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Matrix of `ad_u`, column `j` holding `[u, e_j]`.
    pub fn ad_matrix(&self, u: &Vec3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut e = [0.0; 3];
            e[j] = 1.0;
            let col = self.bracket(u, &e);
            for i in 0..3 {
                m[i][j] = col[i];
            }
        }
        m
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    r = r.max((self.c[k][i][j] + self.c[k][j][i]).abs());
                }
            }
        }
        r
    }

    /// Largest component of `[e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]]`.
    pub fn jacobi_residual(&self) -> f64 {
        let e = |i: usize| {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            v
        };
        let mut r: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let a = self.bracket(&e(i), &self.bracket(&e(j), &e(l)));
                    let b = self.bracket(&e(j), &self.bracket(&e(l), &e(i)));
                    let c = self.bracket(&e(l), &self.bracket(&e(i), &e(j)));
                    for k in 0..3 {
                        r = r.max((a[k] + b[k] + c[k]).abs());
                    }
                }
            }
        }
        r
    }

    /// Dimension of `g' = [g, g]` and an orthonormal basis of it, ordered by
    /// decreasing singular value.
    pub fn derived_subalgebra(&self, tol: &ToleranceProfile) -> (usize, Vec<Vec3>) {
        let cols = [self.basis_bracket(0, 1), self.basis_bracket(0, 2), self.basis_bracket(1, 2)];
        let m = Matrix3::from_fn(|i, j| cols[j][i]);
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let smax = svd.singular_values[order[0]];
        if smax == 0.0 {
            return (0, Vec::new());
        }
        let basis: Vec<Vec3> = order
            .iter()
            .filter(|&&k| svd.singular_values[k] > tol.rank * smax)
            .map(|&k| [u[(0, k)], u[(1, k)], u[(2, k)]])
            .collect();
        (basis.len(), basis)
    }

    /// Structure constants in the basis `f_j = sum_i p[i][j] e_i`.
    pub fn change_basis(&self, p: &Mat3) -> Result<Self> {
        let pm = Matrix3::from_fn(|i, j| p[i][j]);
        let pinv = pm
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("basis change is singular".into()))?;
        let mut c = [[[0.0; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let fa = [p[0][a], p[1][a], p[2][a]];
                let fb = [p[0][b], p[1][b], p[2][b]];
                let w = self.bracket(&fa, &fb);
                for m in 0..3 {
                    c[m][a][b] = (0..3).map(|k| pinv[(m, k)] * w[k]).sum();
                }
            }
        }
        Ok(Self { c })
    }
}

/// The classification input: algebra, horizontal plane and its metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubRiemannianTriple {
    #[serde(flatten)]
    pub algebra: LieAlgebra3,
    /// Two coordinate vectors spanning `H`.
    #[serde(rename = "H")]
    pub h_basis: [Vec3; 2],
    /// Gram matrix of `h_basis` under the horizontal inner product.
    pub metric: Mat2,
}

impl SubRiemannianTriple {
    /// Re-expresses the triple in the basis `f_j = sum_i p[i][j] e_i`. The
    /// horizontal vectors are unchanged, only their coordinates move, so the
    /// metric is carried over as is.
    pub fn change_basis(&self, p: &Mat3) -> Result<Self> {
        let pm = Matrix3::from_fn(|i, j| p[i][j]);
        let pinv = pm
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("basis change is singular".into()))?;
        let map = |h: &Vec3| -> Vec3 {
            let v = pinv * nalgebra::Vector3::new(h[0], h[1], h[2]);
            [v[0], v[1], v[2]]
        };
        Ok(Self {
            algebra: self.algebra.change_basis(p)?,
            h_basis: [map(&self.h_basis[0]), map(&self.h_basis[1])],
            metric: self.metric,
        })
    }

    /// Replaces the spanning vectors of `H` by `h'_j = sum_i m[i][j] h_i`,
    /// adjusting the Gram matrix so that the inner product is unchanged.
    pub fn change_horizontal_frame(&self, m: &Mat2) -> Self {
        let h = &self.h_basis;
        let nh = [
            axpy3(m[0][0], &h[0], m[1][0], &h[1]),
            axpy3(m[0][1], &h[0], m[1][1], &h[1]),
        ];
        let g = &self.metric;
        let mut ng = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        s += m[i][a] * g[i][j] * m[j][b];
                    }
                }
                ng[a][b] = s;
            }
        }
        Self {
            algebra: self.algebra.clone(),
            h_basis: nh,
            metric: ng,
        }
    }

    /// Inner product of two horizontal vectors given by their coefficients
    /// in `h_basis`.
    pub fn metric_inner(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        let g = &self.metric;
        a[0] * (g[0][0] * b[0] + g[0][1] * b[1]) + a[1] * (g[1][0] * b[0] + g[1][1] * b[1])
    }

    /// Coefficients of `v` in `h_basis` together with the residual of the
    /// least-squares fit (zero when `v` lies in `H`).
    pub fn horizontal_coefficients(&self, v: &Vec3) -> ([f64; 2], f64) {
        let [h1, h2] = &self.h_basis;
        let g11 = dot3(h1, h1);
        let g12 = dot3(h1, h2);
        let g22 = dot3(h2, h2);
        let r1 = dot3(h1, v);
        let r2 = dot3(h2, v);
        let det = g11 * g22 - g12 * g12;
        let a = (g22 * r1 - g12 * r2) / det;
        let b = (g11 * r2 - g12 * r1) / det;
        let fit = axpy3(a, h1, b, h2);
        let res = norm3(&axpy3(1.0, v, -1.0, &fit));
        ([a, b], res)
    }
}

/// One violated standing assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NonFinite,
    Antisymmetry { residual: f64 },
    Jacobi { residual: f64 },
    Commutative,
    NotSolvable { derived_rank: usize },
    MetricNotSymmetric { residual: f64 },
    MetricNotPositiveDefinite { min_eigenvalue: f64 },
    HorizontalBasisDegenerate { singular_value_ratio: f64 },
    NotHormander { singular_value_ratio: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite input"),
            Violation::Antisymmetry { residual } => write!(f, "structure constants not antisymmetric (residual {residual:e})"),
            Violation::Jacobi { residual } => write!(f, "Jacobi identity fails (residual {residual:e})"),
            Violation::Commutative => write!(f, "algebra is commutative"),
            Violation::NotSolvable { derived_rank } => write!(f, "algebra is not solvable (dim g' = {derived_rank})"),
            Violation::MetricNotSymmetric { residual } => write!(f, "metric not symmetric (residual {residual:e})"),
            Violation::MetricNotPositiveDefinite { min_eigenvalue } => {
                write!(f, "metric not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::HorizontalBasisDegenerate { singular_value_ratio } => {
                write!(f, "horizontal basis vectors are dependent (ratio {singular_value_ratio:e})")
            }
            Violation::NotHormander { singular_value_ratio } => {
                write!(f, "H + [H, H] does not span the algebra (ratio {singular_value_ratio:e})")
            }
        }
    }
}

/// All violated assumptions of a triple; empty when the triple is usable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn singular_values3(cols: [Vec3; 3]) -> [f64; 3] {
    let m = Matrix3::from_fn(|i, j| cols[j][i]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    [s[0], s[1], s[2]]
}

fn unit_or_zero(v: &Vec3) -> Vec3 {
    let n = norm3(v);
    if n > 0.0 {
        scale3(1.0 / n, v)
    } else {
        *v
    }
}

fn sym2_eigenvalues(g: &Mat2) -> (f64, f64) {
    let a = g[0][0];
    let d = g[1][1];
    let b = 0.5 * (g[0][1] + g[1][0]);
    let m = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (m - r, m + r)
}

/// Checks every standing assumption and lists the ones that fail.
pub fn validate(triple: &SubRiemannianTriple, tol: &ToleranceProfile) -> ValidationReport {
    let mut violations = Vec::new();
    let alg = &triple.algebra;
    let finite = alg.c.iter().flatten().flatten().all(|v| v.is_finite())
        && triple.h_basis.iter().flatten().all(|v| v.is_finite())
        && triple.metric.iter().flatten().all(|v| v.is_finite());
    if !finite {
        return ValidationReport {
            violations: vec![Violation::NonFinite],
        };
    }

    let scale = alg.scale();
    let anti = alg.antisymmetry_residual();
    if anti > tol.antisymmetry * scale.max(f64::MIN_POSITIVE) {
        violations.push(Violation::Antisymmetry { residual: anti });
    }
    let jac = alg.jacobi_residual();
    if jac > tol.jacobi * scale * scale {
        violations.push(Violation::Jacobi { residual: jac });
    }

    let (rank, basis) = alg.derived_subalgebra(tol);
    match rank {
        0 => violations.push(Violation::Commutative),
        3 => violations.push(Violation::NotSolvable { derived_rank: 3 }),
        2 => {
            let w = alg.bracket(&basis[0], &basis[1]);
            if norm3(&w) > tol.rank * scale {
                violations.push(Violation::NotSolvable { derived_rank: 2 });
            }
        }
        _ => {}
    }

    let g = &triple.metric;
    let gscale = g.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let asym = (g[0][1] - g[1][0]).abs();
    if asym > tol.metric_symmetry * gscale.max(f64::MIN_POSITIVE) {
        violations.push(Violation::MetricNotSymmetric { residual: asym });
    }
    let (emin, _) = sym2_eigenvalues(g);
    if emin <= tol.metric_eigen {
        violations.push(Violation::MetricNotPositiveDefinite { min_eigenvalue: emin });
    }

    let h1 = unit_or_zero(&triple.h_basis[0]);
    let h2 = unit_or_zero(&triple.h_basis[1]);
    let cross = [
        h1[1] * h2[2] - h1[2] * h2[1],
        h1[2] * h2[0] - h1[0] * h2[2],
        h1[0] * h2[1] - h1[1] * h2[0],
    ];
    let sin_angle = norm3(&cross);
    if sin_angle <= tol.rank {
        violations.push(Violation::HorizontalBasisDegenerate {
            singular_value_ratio: sin_angle,
        });
    } else {
        let b = unit_or_zero(&alg.bracket(&triple.h_basis[0], &triple.h_basis[1]));
        let s = singular_values3([h1, h2, b]);
        let ratio = if s[0] > 0.0 { s[2] / s[0] } else { 0.0 };
        if ratio <= tol.hormander {
            violations.push(Violation::NotHormander {
                singular_value_ratio: ratio,
            });
        }
    }
    ValidationReport { violations }
}

/// Canonical parameters `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub beta: f64,
}

impl Params {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    pub fn discriminant(&self) -> f64 {
        self.beta * self.beta + 4.0 * self.alpha
    }

    /// `alpha^+ = max(alpha, 0)`.
    pub fn alpha_plus(&self) -> f64 {
        self.alpha.max(0.0)
    }

    /// The constant `beta^2 + alpha^+` of the semigroup gradient bound.
    pub fn kappa_cd(&self) -> f64 {
        self.beta * self.beta + self.alpha_plus()
    }
}

/// Canonical basis in the coordinates of the input algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
    pub alpha: f64,
    pub beta: f64,
    /// Dimension of the derived subalgebra.
    pub derived_rank: usize,
}

impl CanonicalForm {
    pub fn params(&self) -> Params {
        Params::new(self.alpha, self.beta)
    }

    /// Largest relative residual of the three canonical bracket relations.
    pub fn bracket_residual(&self, alg: &LieAlgebra3) -> f64 {
        let s = alg.scale().max(f64::MIN_POSITIVE);
        let r1 = norm3(&axpy3(1.0, &alg.bracket(&self.x, &self.y), -1.0, &self.z))
            / (s * norm3(&self.x) * norm3(&self.y));
        let target = axpy3(self.alpha, &self.y, self.beta, &self.z);
        let r2 = norm3(&axpy3(1.0, &alg.bracket(&self.x, &self.z), -1.0, &target))
            / (s * norm3(&self.x) * norm3(&self.z));
        let r3 = norm3(&alg.bracket(&self.y, &self.z)) / (s * norm3(&self.y) * norm3(&self.z));
        r1.max(r2).max(r3)
    }
}

/// The five normal forms and their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag")]
pub enum Regime {
    /// `alpha = 0`, `beta = 0`.
    Rank1Heisenberg,
    /// `alpha = 0`, `beta > 0`.
    Rank1BetaPos { beta: f64 },
    /// Real distinct eigenvalues `lambda1 > lambda2` of `ad_X` on `g'`.
    DeltaPos { lambda1: f64, lambda2: f64 },
    /// Complex eigenvalues `rho +- i omega`; `theta0 = atan(rho / omega)`.
    DeltaNeg { rho: f64, omega: f64, theta0: f64 },
    /// Double eigenvalue `lambda = beta / 2`.
    DeltaZero { lambda: f64 },
}

impl Regime {
    /// Regime of explicitly given parameters. `alpha == 0.0` selects the
    /// rank-one family.
    pub fn from_params(p: Params, tol: &ToleranceProfile) -> Result<Self> {
        if !(p.alpha.is_finite() && p.beta.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if p.beta < 0.0 {
            return Err(Error::InvalidArgument(format!("beta must be >= 0, got {}", p.beta)));
        }
        let rank = if p.alpha == 0.0 { 1 } else { 2 };
        Ok(Self::classify(p, rank, tol))
    }

    fn classify(p: Params, rank: usize, tol: &ToleranceProfile) -> Self {
        let Params { alpha, beta } = p;
        if rank == 1 {
            return if beta == 0.0 {
                Regime::Rank1Heisenberg
            } else {
                Regime::Rank1BetaPos { beta }
            };
        }
        let delta = p.discriminant();
        if delta.abs() <= tol.discriminant * (beta * beta + 4.0 * alpha.abs()) {
            Regime::DeltaZero { lambda: beta / 2.0 }
        } else if delta > 0.0 {
            let s = delta.sqrt();
            Regime::DeltaPos {
                lambda1: (beta + s) / 2.0,
                lambda2: (beta - s) / 2.0,
            }
        } else {
            let rho = beta / 2.0;
            let omega = (-delta).sqrt() / 2.0;
            Regime::DeltaNeg {
                rho,
                omega,
                theta0: (rho / omega).atan(),
            }
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Rank1Heisenberg => "Rank1Heisenberg",
            Regime::Rank1BetaPos { .. } => "Rank1BetaPos",
            Regime::DeltaPos { .. } => "DeltaPos",
            Regime::DeltaNeg { .. } => "DeltaNeg",
            Regime::DeltaZero { .. } => "DeltaZero",
        }
    }

    /// The parameters implied by the regime's own constants.
    pub fn params(&self) -> Params {
        match *self {
            Regime::Rank1Heisenberg => Params::new(0.0, 0.0),
            Regime::Rank1BetaPos { beta } => Params::new(0.0, beta),
            Regime::DeltaPos { lambda1, lambda2 } => Params::new(-lambda1 * lambda2, lambda1 + lambda2),
            Regime::DeltaNeg { rho, omega, .. } => Params::new(-(rho * rho + omega * omega), 2.0 * rho),
            Regime::DeltaZero { lambda } => Params::new(-lambda * lambda, 2.0 * lambda),
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            Regime::DeltaZero { .. } => 0.0,
            _ => self.params().discriminant(),
        }
    }

    pub fn is_rank_one(&self) -> bool {
        matches!(self, Regime::Rank1Heisenberg | Regime::Rank1BetaPos { .. })
    }
}

/// Connection coefficients in the frame `(X, Y, R)`: `nabla[i][j]` holds the
/// components of `nabla_{F_i} F_j` where `F = (X, Y, R)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Christoffel {
    pub nabla: [[Vec3; 3]; 3],
}

impl Christoffel {
    pub fn from_params(p: Params) -> Self {
        let Params { alpha, beta } = p;
        let z = [0.0; 3];
        Self {
            nabla: [
                [z, [0.0, 0.5 * beta, 0.0], z],
                [[0.0, -beta, 0.0], z, z],
                [[0.0, -0.5 * alpha, 0.0], [0.5 * alpha, 0.0, 0.0], z],
            ],
        }
    }
}

/// Constants of the CR geometry attached to the canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricData {
    /// Reeb field `R = -beta Y + Z` in input coordinates.
    pub reeb: Vec3,
    /// Pseudo-Hermitian torsion coefficient `alpha / 2`.
    pub torsion_coeff: f64,
    /// Horizontal Ricci constant `-(beta^2 + alpha / 2)`.
    pub ricci_constant: f64,
    pub chi: f64,
    /// The differential invariant `-beta^2 - alpha / 2`.
    pub kappa_ab: f64,
    /// The gradient-bound constant `beta^2 + alpha^+`.
    pub kappa_cd: f64,
    pub christoffel: Christoffel,
}

impl GeometricData {
    pub fn new(form: &CanonicalForm) -> Self {
        let p = form.params();
        Self {
            reeb: axpy3(-p.beta, &form.y, 1.0, &form.z),
            torsion_coeff: p.alpha / 2.0,
            ricci_constant: -(p.beta * p.beta + p.alpha / 2.0),
            chi: p.alpha.abs() / 2.0,
            kappa_ab: -p.beta * p.beta - p.alpha / 2.0,
            kappa_cd: p.kappa_cd(),
            christoffel: Christoffel::from_params(p),
        }
    }

    /// Relative residual of `[X,Y] = beta Y + R`, `[X,R] = alpha Y`, `[Y,R] = 0`.
    pub fn frame_residual(&self, form: &CanonicalForm, alg: &LieAlgebra3) -> f64 {
        let s = alg.scale().max(f64::MIN_POSITIVE);
        let (x, y, r) = (&form.x, &form.y, &self.reeb);
        let rel = |v: Vec3, a: &Vec3, b: &Vec3| norm3(&v) / (s * norm3(a) * norm3(b));
        let e1 = axpy3(1.0, &alg.bracket(x, y), -1.0, &axpy3(form.beta, y, 1.0, r));
        let e2 = axpy3(1.0, &alg.bracket(x, r), -form.alpha, y);
        let e3 = alg.bracket(y, r);
        rel(e1, x, y).max(rel(e2, x, r)).max(rel(e3, y, r))
    }
}

/// Output of [`canonicalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub form: CanonicalForm,
    pub regime: Regime,
    pub geometry: GeometricData,
}

/// Metric-orthonormal frame of `H`: `E = [h1 h2] L^{-T}` with `G = L L^T`.
fn orthonormal_frame(triple: &SubRiemannianTriple) -> [Vec3; 2] {
    let g = &triple.metric;
    let l11 = g[0][0].sqrt();
    let l21 = 0.5 * (g[0][1] + g[1][0]) / l11;
    let l22 = (g[1][1] - l21 * l21).sqrt();
    let [h1, h2] = &triple.h_basis;
    let e1 = scale3(1.0 / l11, h1);
    let e2 = axpy3(-l21 / (l11 * l22), h1, 1.0 / l22, h2);
    [e1, e2]
}

/// Orients `(a, b)` so that its first nonzero component is positive.
fn orient(a: f64, b: f64) -> (f64, f64) {
    let n = a.hypot(b);
    let (a, b) = (a / n, b / n);
    if a < -1e-14 || (a.abs() <= 1e-14 && b < 0.0) {
        (-a, -b)
    } else {
        (a, b)
    }
}

fn frobenius3(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Finds the canonical basis, parameters, regime and geometric constants.
pub fn canonicalize(triple: &SubRiemannianTriple, tol: &ToleranceProfile) -> Result<Classification> {
    let report = validate(triple, tol);
    if !report.is_valid() {
        if report.violations.iter().any(|v| matches!(v, Violation::NotSolvable { .. })) {
            return Err(Error::NotSolvable);
        }
        if report.violations.iter().any(|v| matches!(v, Violation::NotHormander { .. })) {
            return Err(Error::NotHormander);
        }
        return Err(Error::InvalidTriple(report));
    }
    let alg = &triple.algebra;
    let scale = alg.scale();
    let [e1, e2] = orthonormal_frame(triple);
    let (rank, derived) = alg.derived_subalgebra(tol);

    let form = if rank == 1 {
        let z0 = derived[0];
        let n1 = dot3(&alg.bracket(&e1, &z0), &z0);
        let n2 = dot3(&alg.bracket(&e2, &z0), &z0);
        let bound = scale * norm3(&e1).max(norm3(&e2));
        let (a, b) = if n1.hypot(n2) <= tol.rank * bound {
            (1.0, 0.0)
        } else {
            orient(-n2, n1)
        };
        let y = axpy3(a, &e1, b, &e2);
        let x0 = axpy3(-b, &e1, a, &e2);
        let z1 = alg.bracket(&x0, &y);
        let w = alg.bracket(&x0, &z1);
        let ad_norm = frobenius3(&alg.ad_matrix(&x0));
        let beta0 = if norm3(&w) <= tol.rank * ad_norm * norm3(&z1) {
            0.0
        } else {
            dot3(&w, &z1) / dot3(&z1, &z1)
        };
        let (x, z, beta) = if beta0 < 0.0 {
            (scale3(-1.0, &x0), scale3(-1.0, &z1), -beta0)
        } else {
            (x0, z1, beta0)
        };
        CanonicalForm {
            x,
            y,
            z,
            alpha: 0.0,
            beta,
            derived_rank: 1,
        }
    } else {
        let (u1, u2) = (derived[0], derived[1]);
        let n1 = norm3(&e1);
        let n2 = norm3(&e2);
        let cols = [scale3(1.0 / n1, &e1), scale3(1.0 / n2, &e2), scale3(-1.0, &u1), scale3(-1.0, &u2)];
        let m = SMatrix::<f64, 3, 4>::from_fn(|i, j| cols[j][i]);
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        if s[2] <= tol.rank * s[0] {
            return Err(Error::DegenerateInput(format!(
                "H and g' do not meet in a single line (singular values {s:?})"
            )));
        }
        // Null vector of the 3x4 matrix from its signed 3x3 minors.
        let minor = |skip: usize| {
            let idx: Vec<usize> = (0..4).filter(|&j| j != skip).collect();
            Matrix3::from_fn(|i, j| cols[idx[j]][i]).determinant()
        };
        let w: Vec<f64> = (0..4)
            .map(|j| if j % 2 == 0 { minor(j) } else { -minor(j) })
            .collect();
        let (a, b) = (w[0] / n1, w[1] / n2);
        if a.hypot(b) == 0.0 {
            return Err(Error::DegenerateInput("intersection H and g' is empty".into()));
        }
        let (a, b) = orient(a, b);
        let y = axpy3(a, &e1, b, &e2);
        let x0 = axpy3(-b, &e1, a, &e2);
        let z0 = alg.bracket(&x0, &y);
        if norm3(&z0) <= tol.rank * scale * norm3(&x0) * norm3(&y) {
            return Err(Error::DegenerateInput("[X, Y] vanishes".into()));
        }
        let wv = alg.bracket(&x0, &z0);
        let (g11, g12, g22) = (dot3(&y, &y), dot3(&y, &z0), dot3(&z0, &z0));
        let (r1, r2) = (dot3(&y, &wv), dot3(&z0, &wv));
        let det = g11 * g22 - g12 * g12;
        let alpha = (g22 * r1 - g12 * r2) / det;
        let beta0 = (g11 * r2 - g12 * r1) / det;
        let (x, z, beta) = if beta0 < 0.0 {
            (scale3(-1.0, &x0), scale3(-1.0, &z0), -beta0)
        } else {
            (x0, z0, beta0)
        };
        CanonicalForm {
            x,
            y,
            z,
            alpha,
            beta,
            derived_rank: 2,
        }
    };

    let residual = form.bracket_residual(alg);
    if !(residual <= tol.canonical_residual) {
        return Err(Error::DegenerateInput(format!(
            "canonical relations hold only to {residual:e}"
        )));
    }
    let regime = Regime::classify(form.params(), form.derived_rank, tol);
    let geometry = GeometricData::new(&form);
    Ok(Classification { form, regime, geometry })
}

/// Characteristic polynomials attached to `X`, coefficients in ascending
/// powers of `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPolys {
    /// `lambda^2 - beta lambda - alpha` for `ad_X` restricted to `g'`.
    pub ad_x_derived: [f64; 3],
    /// `-lambda^3 + beta lambda^2 + alpha lambda` for `ad_X` on all of `g`.
    pub ad_x_full: [f64; 4],
}

pub fn characteristic_poly(p: Params) -> CharacteristicPolys {
    CharacteristicPolys {
        ad_x_derived: [-p.alpha, -p.beta, 1.0],
        ad_x_full: [0.0, p.alpha, p.beta, -1.0],
    }
}

/// `det(M - lambda I)` in ascending powers of `lambda`.
pub fn char_poly3(m: &Mat3) -> [f64; 4] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = Matrix3::from_fn(|i, j| m[i][j]).determinant();
    [det, -minors, tr, -1.0]
}

/// Roots of `lambda^2 - beta lambda - alpha` as `(re, im)` pairs.
pub fn ad_x_eigenvalues(p: Params) -> [(f64, f64); 2] {
    let d = p.discriminant();
    if d >= 0.0 {
        let s = d.sqrt();
        [((p.beta + s) / 2.0, 0.0), ((p.beta - s) / 2.0, 0.0)]
    } else {
        let s = (-d).sqrt();
        [(p.beta / 2.0, s / 2.0), (p.beta / 2.0, -s / 2.0)]
    }
}

/// The constant `C > 0` with `C beta_hat = beta` and `C^2 alpha_hat = alpha`,
/// if one exists. Two all-zero pairs give `C = 1`.
pub fn almost_isomorphic(p: Params, q: Params, tol: &ToleranceProfile) -> Option<f64> {
    let zero = |v: f64| v.abs() <= tol.parameter_match;
    let (a0, b0, c0, d0) = (zero(p.alpha), zero(p.beta), zero(q.alpha), zero(q.beta));
    if a0 != c0 || b0 != d0 {
        return None;
    }
    if a0 {
        return Some(if b0 { 1.0 } else { p.beta / q.beta });
    }
    let ratio = p.alpha / q.alpha;
    if ratio <= 0.0 {
        return None;
    }
    let c = ratio.sqrt();
    if (c * q.beta - p.beta).abs() <= tol.parameter_match * p.beta.abs().max(1.0) {
        Some(c)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heisenberg() -> SubRiemannianTriple {
        SubRiemannianTriple {
            algebra: LieAlgebra3::from_brackets([0.0, 0.0, 1.0], [0.0; 3], [0.0; 3]),
            h_basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            metric: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    #[test]
    fn heisenberg_is_valid_and_flat() {
        let tol = ToleranceProfile::default();
        assert!(validate(&heisenberg(), &tol).is_valid());
        let c = canonicalize(&heisenberg(), &tol).unwrap();
        assert_eq!((c.form.alpha, c.form.beta), (0.0, 0.0));
        assert_eq!(c.regime, Regime::Rank1Heisenberg);
    }

    #[test]
    fn jacobi_violation_is_reported() {
        // [e0,e1]=e2, [e0,e2]=e0, [e1,e2]=0 fails Jacobi on (e0, e1, e2).
        let alg = LieAlgebra3::from_brackets([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]);
        let t = SubRiemannianTriple {
            algebra: alg,
            ..heisenberg()
        };
        let r = validate(&t, &ToleranceProfile::default());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::Jacobi { .. })));
    }

    #[test]
    fn horizontal_plane_equal_to_derived_algebra_is_rejected() {
        let t = SubRiemannianTriple {
            algebra: LieAlgebra3::canonical(-1.0, 0.0),
            h_basis: [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            metric: [[1.0, 0.0], [0.0, 1.0]],
        };
        let r = validate(&t, &ToleranceProfile::default());
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NotHormander { .. })));
        assert!(matches!(canonicalize(&t, &ToleranceProfile::default()), Err(Error::NotHormander)));
    }

    #[test]
    fn so3_is_not_solvable() {
        let t = SubRiemannianTriple {
            algebra: LieAlgebra3::from_brackets([0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]),
            ..heisenberg()
        };
        assert!(matches!(canonicalize(&t, &ToleranceProfile::default()), Err(Error::NotSolvable)));
    }

    #[test]
    fn metric_must_be_positive_definite() {
        let t = SubRiemannianTriple {
            metric: [[1.0, 2.0], [2.0, 1.0]],
            ..heisenberg()
        };
        let r = validate(&t, &ToleranceProfile::default());
        assert!(matches!(r.violations[..], [Violation::MetricNotPositiveDefinite { .. }]));
    }

    #[test]
    fn canonical_algebra_round_trips() {
        let tol = ToleranceProfile::default();
        for (a, b) in [(1.0, 0.0), (-1.0, 0.0), (-2.0, 1.0), (0.0, 1.5), (-0.25, 1.0)] {
            let t = SubRiemannianTriple {
                algebra: LieAlgebra3::canonical(a, b),
                h_basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
                metric: [[1.0, 0.0], [0.0, 1.0]],
            };
            let c = canonicalize(&t, &tol).unwrap();
            assert!((c.form.alpha - a).abs() < 1e-14 && (c.form.beta - b).abs() < 1e-14, "{a} {b}");
            assert!(c.geometry.frame_residual(&c.form, &t.algebra) < 1e-14);
        }
    }

    #[test]
    fn flipped_x_gives_nonnegative_beta() {
        let t = SubRiemannianTriple {
            algebra: LieAlgebra3::canonical(-2.0, 1.0),
            h_basis: [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            metric: [[1.0, 0.0], [0.0, 1.0]],
        };
        let c = canonicalize(&t, &ToleranceProfile::default()).unwrap();
        assert!((c.form.beta - 1.0).abs() < 1e-14);
        assert!((c.form.alpha + 2.0).abs() < 1e-14);
    }

    #[test]
    fn char_poly_of_canonical_ad_x() {
        let alg = LieAlgebra3::canonical(0.7, 1.3);
        let cp = char_poly3(&alg.ad_matrix(&[1.0, 0.0, 0.0]));
        let expected = characteristic_poly(Params::new(0.7, 1.3)).ad_x_full;
        for k in 0..4 {
            assert!((cp[k] - expected[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn almost_isomorphism_examples() {
        let tol = ToleranceProfile::default();
        assert_eq!(almost_isomorphic(Params::new(4.0, 2.0), Params::new(1.0, 1.0), &tol), Some(2.0));
        assert_eq!(almost_isomorphic(Params::new(0.0, 0.0), Params::new(0.0, 0.0), &tol), Some(1.0));
        assert_eq!(almost_isomorphic(Params::new(1.0, 0.0), Params::new(-1.0, 0.0), &tol), None);
        assert_eq!(almost_isomorphic(Params::new(0.0, 3.0), Params::new(0.0, 1.5), &tol), Some(2.0));
        assert_eq!(almost_isomorphic(Params::new(4.0, 1.0), Params::new(1.0, 1.0), &tol), None);
    }

    #[test]
    fn regime_constants_satisfy_root_identities() {
        let tol = ToleranceProfile::default();
        match Regime::from_params(Params::new(1.0, 0.5), &tol).unwrap() {
            Regime::DeltaPos { lambda1, lambda2 } => {
                assert!((lambda1 * lambda2 + 1.0).abs() < 1e-12);
                assert!((lambda1 + lambda2 - 0.5).abs() < 1e-12);
            }
            r => panic!("{r:?}"),
        }
        match Regime::from_params(Params::new(-2.0, 1.0), &tol).unwrap() {
            Regime::DeltaNeg { rho, omega, theta0 } => {
                assert!((rho * rho + omega * omega - 2.0).abs() < 1e-12);
                assert!((0.0..std::f64::consts::FRAC_PI_2).contains(&theta0));
            }
            r => panic!("{r:?}"),
        }
        assert_eq!(
            Regime::from_params(Params::new(-1.0, 2.0), &tol).unwrap(),
            Regime::DeltaZero { lambda: 1.0 }
        );
    }
}
