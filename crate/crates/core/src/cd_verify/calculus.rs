use rand::Rng;
use serde::{Deserialize, Serialize};

use super::expr::{Expr, DEFAULT_TERM_CAP};
use crate::algebra::{Params, Regime};
use crate::error::Result;
use crate::representation::{AffineRep, GroupPoint};

/// The frame fields `X`, `Y`, `R` and the sub-Laplacian `L = X^2 + Y^2 - beta X`
/// acting exactly on [`Expr`].
#[derive(Debug, Clone)]
pub struct FieldCalculus {
    pub params: Params,
    y_coeff: [Expr; 2],
    r_coeff: [Expr; 2],
    pub cap: usize,
}

/// Entries of `exp(theta A)` as expressions.
fn exp_a_exprs(regime: &Regime) -> [[Expr; 2]; 2] {
    let zero = Expr::zero;
    let one = || Expr::constant(1.0);
    match *regime {
        Regime::Rank1Heisenberg => [[one(), Expr::theta()], [zero(), one()]],
        Regime::Rank1BetaPos { beta } => [[Expr::exp(beta), zero()], [zero(), one()]],
        Regime::DeltaPos { lambda1, lambda2 } => [[Expr::exp(lambda1), zero()], [zero(), Expr::exp(lambda2)]],
        Regime::DeltaNeg { rho, omega, .. } => {
            let e = Expr::exp(rho);
            let c = e.mul(&Expr::cos(omega), usize::MAX).expect("uncapped");
            let s = e.mul(&Expr::sin(omega), usize::MAX).expect("uncapped");
            [[c.clone(), s.scale(-1.0)], [s, c]]
        }
        Regime::DeltaZero { lambda } => {
            let e = Expr::exp(lambda);
            let te = e.mul(&Expr::theta(), usize::MAX).expect("uncapped");
            [[e.clone(), te], [zero(), e]]
        }
    }
}

fn apply_to(m: &[[Expr; 2]; 2], v: &[f64; 2]) -> [Expr; 2] {
    [
        Expr::linear_combination(&[(v[0], &m[0][0]), (v[1], &m[0][1])]),
        Expr::linear_combination(&[(v[0], &m[1][0]), (v[1], &m[1][1])]),
    ]
}

impl FieldCalculus {
    pub fn new(rep: &AffineRep) -> Self {
        Self::with_cap(rep, DEFAULT_TERM_CAP)
    }

    pub fn with_cap(rep: &AffineRep, cap: usize) -> Self {
        let m = exp_a_exprs(&rep.regime);
        Self {
            params: rep.params,
            y_coeff: apply_to(&m, &rep.ybar),
            r_coeff: apply_to(&m, &rep.rbar),
            cap,
        }
    }

    pub fn y_coefficients(&self) -> &[Expr; 2] {
        &self.y_coeff
    }

    pub fn r_coefficients(&self) -> &[Expr; 2] {
        &self.r_coeff
    }

    pub fn x(&self, f: &Expr) -> Expr {
        f.d_theta()
    }

    fn along(&self, c: &[Expr; 2], f: &Expr) -> Result<Expr> {
        Ok(c[0].mul(&f.d_x(), self.cap)?.add(&c[1].mul(&f.d_y(), self.cap)?))
    }

    pub fn y(&self, f: &Expr) -> Result<Expr> {
        self.along(&self.y_coeff, f)
    }

    pub fn r(&self, f: &Expr) -> Result<Expr> {
        self.along(&self.r_coeff, f)
    }

    pub fn l(&self, f: &Expr) -> Result<Expr> {
        let xf = self.x(f);
        let yy = self.y(&self.y(f)?)?;
        Ok(Expr::linear_combination(&[(1.0, &self.x(&xf)), (1.0, &yy), (-self.params.beta, &xf)]))
    }

    /// `Gamma(f, g) = (Xf)(Xg) + (Yf)(Yg)`.
    pub fn gamma(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        let xx = self.x(f).mul(&self.x(g), self.cap)?;
        Ok(xx.add(&self.y(f)?.mul(&self.y(g)?, self.cap)?))
    }

    /// `Gamma^R(f, g) = (Rf)(Rg)`.
    pub fn gamma_r(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.r(f)?.mul(&self.r(g)?, self.cap)
    }

    /// All carre du champ forms of `f` as expressions.
    pub fn forms(&self, f: &Expr) -> Result<CarreForms> {
        let lf = self.l(f)?;
        let gamma = self.gamma(f, f)?;
        let gamma_r = self.gamma_r(f, f)?;
        let gamma2 = Expr::linear_combination(&[(0.5, &self.l(&gamma)?), (-1.0, &self.gamma(f, &lf)?)]);
        let gamma2_r = Expr::linear_combination(&[(0.5, &self.l(&gamma_r)?), (-1.0, &self.gamma_r(f, &lf)?)]);
        Ok(CarreForms {
            gamma,
            gamma_r,
            gamma2,
            gamma2_r,
            lf,
        })
    }

    /// The sum-of-squares expansion of `Gamma_2(f)`:
    ///
    /// ```text
    /// (X^2 f)^2 + (Y^2 f - beta Xf)^2 + 1/2 ((XY + YX) f + beta Yf)^2 + 1/2 (Rf)^2
    ///   - beta^2 (Xf)^2 - (alpha + beta^2) (Yf)^2 + 2 (Yf)(XRf) - 2 (Xf)(YRf)
    /// ```
    pub fn expanded_gamma2(&self, f: &Expr) -> Result<Expr> {
        self.expanded_gamma2_with(f, false)
    }

    /// The same expansion with `(XY + YX) f` replaced by `2 XY f`.
    pub fn expanded_gamma2_doubled_xy(&self, f: &Expr) -> Result<Expr> {
        self.expanded_gamma2_with(f, true)
    }

    fn expanded_gamma2_with(&self, f: &Expr, doubled: bool) -> Result<Expr> {
        let Params { alpha, beta } = self.params;
        let cap = self.cap;
        let xf = self.x(f);
        let yf = self.y(f)?;
        let rf = self.r(f)?;
        let xxf = self.x(&xf);
        let yyf = self.y(&yf)?;
        let sym = self.symmetric_xy(f, doubled)?;
        let a = Expr::linear_combination(&[(1.0, &yyf), (-beta, &xf)]);
        let b = Expr::linear_combination(&[(1.0, &sym), (beta, &yf)]);
        Ok(Expr::linear_combination(&[
            (1.0, &xxf.square(cap)?),
            (1.0, &a.square(cap)?),
            (0.5, &b.square(cap)?),
            (0.5, &rf.square(cap)?),
            (-beta * beta, &xf.square(cap)?),
            (-(alpha + beta * beta), &yf.square(cap)?),
            (2.0, &yf.mul(&self.x(&rf), cap)?),
            (-2.0, &xf.mul(&self.y(&rf)?, cap)?),
        ]))
    }

    fn symmetric_xy(&self, f: &Expr, doubled: bool) -> Result<Expr> {
        let xyf = self.x(&self.y(f)?);
        if doubled {
            Ok(xyf.scale(2.0))
        } else {
            Ok(xyf.add(&self.y(&self.x(f))?))
        }
    }

    /// `(XRf)^2 + (YRf)^2 + alpha (Rf)((XY + YX) f - beta Yf)`.
    pub fn expanded_gamma2_r(&self, f: &Expr) -> Result<Expr> {
        let Params { alpha, beta } = self.params;
        let rf = self.r(f)?;
        let sym = self.symmetric_xy(f, false)?;
        let inner = Expr::linear_combination(&[(1.0, &sym), (-beta, &self.y(f)?)]);
        Ok(Expr::linear_combination(&[
            (1.0, &self.x(&rf).square(self.cap)?),
            (1.0, &self.y(&rf)?.square(self.cap)?),
            (alpha, &rf.mul(&inner, self.cap)?),
        ]))
    }
}

/// Symbolic `Gamma(f)`, `Gamma^R(f)`, `Gamma_2(f)`, `Gamma_2^R(f)` and `Lf`.
#[derive(Debug, Clone)]
pub struct CarreForms {
    pub gamma: Expr,
    pub gamma_r: Expr,
    pub gamma2: Expr,
    pub gamma2_r: Expr,
    pub lf: Expr,
}

impl CarreForms {
    pub fn eval(&self, p: &GroupPoint) -> CarreResult {
        CarreResult {
            gamma: self.gamma.eval(p),
            gamma_r: self.gamma_r.eval(p),
            gamma2: self.gamma2.eval(p),
            gamma2_r: self.gamma2_r.eval(p),
            lf: self.lf.eval(p),
        }
    }
}

/// The forms evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarreResult {
    pub gamma: f64,
    #[serde(rename = "gammaR")]
    pub gamma_r: f64,
    pub gamma2: f64,
    #[serde(rename = "gamma2R")]
    pub gamma2_r: f64,
    pub lf: f64,
}

impl CarreResult {
    /// `Gamma_2 + nu Gamma_2^R - 1/2 (Lf)^2 - 1/2 (1 - nu^2 alpha^2) Gamma^R
    /// - (-alpha^+ - beta^2 - 1/nu) Gamma`.
    pub fn cd_residual(&self, nu: f64, params: &Params) -> f64 {
        let Params { alpha, beta } = *params;
        self.gamma2 + nu * self.gamma2_r
            - 0.5 * self.lf * self.lf
            - 0.5 * (1.0 - nu * nu * alpha * alpha) * self.gamma_r
            + (params.alpha_plus() + beta * beta + 1.0 / nu) * self.gamma
    }

    /// Residual of the inequality with the cross term `-2 nu alpha beta (Rf)(Yf)`
    /// of the exact square completion bounded by `|nu alpha beta| (Gamma^R + Gamma)`:
    /// `Gamma_2 + nu Gamma_2^R - 1/2 (Lf)^2 - (1/2 (1 - nu^2 alpha^2) - |nu alpha beta|) Gamma^R
    /// + (alpha^+ + beta^2 + 1/nu + |nu alpha beta|) Gamma`.
    /// It equals [`Self::cd_residual`] whenever `alpha beta = 0`.
    pub fn cd_residual_corrected(&self, nu: f64, params: &Params) -> f64 {
        let c = (nu * params.alpha * params.beta).abs();
        self.cd_residual(nu, params) + c * (self.gamma_r + self.gamma)
    }

    /// Residual in the requested form.
    pub fn residual(&self, form: CdForm, nu: f64, params: &Params) -> f64 {
        match form {
            CdForm::Stated => self.cd_residual(nu, params),
            CdForm::Corrected => self.cd_residual_corrected(nu, params),
        }
    }

    /// The residual of the `CD(-beta^2, 1/2, 1, 2)` inequality
    /// `Gamma_2 + nu Gamma_2^R >= 1/2 (Lf)^2 + 1/2 Gamma^R + (-beta^2 - 1/nu) Gamma`,
    /// the form taken when `alpha = 0`.
    pub fn cd_residual_rank_one(&self, nu: f64, beta: f64) -> f64 {
        self.gamma2 + nu * self.gamma2_r - 0.5 * self.lf * self.lf - 0.5 * self.gamma_r
            + (beta * beta + 1.0 / nu) * self.gamma
    }
}

/// Which right-hand side the curvature-dimension residual uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdForm {
    /// `1/2 (Lf)^2 + 1/2 (1 - nu^2 alpha^2) Gamma^R + (-alpha^+ - beta^2 - 1/nu) Gamma`.
    #[default]
    Stated,
    /// The stated form weakened by `|nu alpha beta| (Gamma^R + Gamma)`.
    Corrected,
}

/// Evaluates all forms of `f` at `point`.
pub fn carre(calc: &FieldCalculus, f: &Expr, point: &GroupPoint) -> Result<CarreResult> {
    Ok(calc.forms(f)?.eval(point))
}

/// Residual of the curvature-dimension inequality for `f` at `point`.
pub fn cd_residual(calc: &FieldCalculus, f: &Expr, point: &GroupPoint, nu: f64) -> Result<f64> {
    Ok(carre(calc, f, point)?.cd_residual(nu, &calc.params))
}

/// A named member of the test-function suite.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub name: &'static str,
    pub expr: Expr,
}

/// Twelve functions mixing polynomial, exponential and trigonometric
/// dependence on `theta` with polynomials in `x, y` up to degree three.
pub fn test_suite() -> Vec<TestFunction> {
    let cap = usize::MAX;
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::theta());
    let m = |a: &Expr, b: &Expr| a.mul(b, cap).expect("uncapped");
    let list = vec![
        ("theta", t.clone()),
        ("x", x.clone()),
        ("y", y.clone()),
        ("x*y", m(&x, &y)),
        ("theta^2", m(&t, &t)),
        ("x^2+y^2", m(&x, &x).add(&m(&y, &y))),
        ("cos(theta)", Expr::cos(1.0)),
        ("exp(theta/2)*x", m(&Expr::exp(0.5), &x)),
        ("theta*x+y^2", m(&t, &x).add(&m(&y, &y))),
        ("sin(2theta)*y", m(&Expr::sin(2.0), &y)),
        ("x^3-theta*y", m(&m(&x, &x), &x).sub(&m(&t, &y))),
        ("exp(-theta)*(x+theta*y)", m(&Expr::exp(-1.0), &x.add(&m(&t, &y)))),
    ];
    list.into_iter().map(|(name, expr)| TestFunction { name, expr }).collect()
}

/// Uniform point in the box `|theta|, |x|, |y| <= half_width`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> GroupPoint {
    let mut c = || rng.random_range(-half_width..=half_width);
    GroupPoint::new(c(), c(), c())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::sample_rng;
    use crate::tolerance::ToleranceProfile;

    fn rep(a: f64, b: f64) -> AffineRep {
        AffineRep::from_params(Params::new(a, b), &ToleranceProfile::default()).unwrap()
    }

    #[test]
    fn coefficient_expressions_match_representation() {
        for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (-1.0, 0.0), (-0.25, 1.0)] {
            let r = rep(a, b);
            let calc = FieldCalculus::new(&r);
            for th in [-1.3, 0.0, 0.4, 2.2] {
                let p = GroupPoint::new(th, 0.0, 0.0);
                let c = r.field_coeffs(th);
                for i in 0..2 {
                    assert!((calc.y_coefficients()[i].eval(&p) - c.y_coeff[i]).abs() < 1e-12);
                    assert!((calc.r_coefficients()[i].eval(&p) - c.r_coeff[i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn heisenberg_y_of_x_is_theta() {
        let calc = FieldCalculus::new(&rep(0.0, 0.0));
        let x = Expr::x();
        assert_eq!(calc.y(&x).unwrap(), Expr::theta());
        assert!(calc.l(&x).unwrap().is_empty());
    }

    #[test]
    fn theta_has_constant_laplacian() {
        let calc = FieldCalculus::new(&rep(1.0, 1.0));
        assert_eq!(calc.l(&Expr::theta()).unwrap(), Expr::constant(-1.0));
        let c = carre(&calc, &Expr::theta(), &GroupPoint::new(0.3, 1.0, -2.0)).unwrap();
        assert_eq!((c.gamma, c.gamma_r, c.gamma2, c.gamma2_r), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn constants_have_vanishing_forms() {
        let calc = FieldCalculus::new(&rep(-1.0, 0.0));
        let f = calc.forms(&Expr::constant(3.5)).unwrap();
        assert!(f.gamma.is_empty() && f.gamma_r.is_empty() && f.gamma2.is_empty() && f.gamma2_r.is_empty());
        assert!(f.lf.is_empty());
    }

    #[test]
    fn gamma_is_bilinear() {
        let calc = FieldCalculus::new(&rep(-2.0, 1.0));
        let suite = test_suite();
        let (f, g) = (&suite[9].expr, &suite[10].expr);
        let fg = f.add(g);
        let mut rng = sample_rng(11, 0, 0);
        for _ in 0..20 {
            let p = random_point(&mut rng, 1.5);
            let lhs = calc.gamma(&fg, &fg).unwrap().eval(&p);
            let rhs = calc.gamma(f, f).unwrap().eval(&p)
                + 2.0 * calc.gamma(f, g).unwrap().eval(&p)
                + calc.gamma(g, g).unwrap().eval(&p);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }
}
