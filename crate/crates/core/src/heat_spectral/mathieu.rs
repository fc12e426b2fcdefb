//! Periodic Mathieu functions `ce_k(theta, q)`, `se_k(theta, q)` and their
//! characteristic values `a_k(q)`, `b_k(q)`.
//!
//! The functions solve `y'' + (a - 2 q cos 2 theta) y = 0` and are normalised
//! by `int_0^{2 pi} y^2 = pi`. Each splits into one of four parity classes of
//! Fourier series; the coefficients satisfy a three-term recurrence that is an
//! eigenproblem for a symmetric tridiagonal matrix once the `cos 0` term of
//! the even cosine class is rescaled by `sqrt 2`.
//!
//! Sign convention: `ce_k(0, q) > 0` and `se_k'(0, q) > 0`. Neither quantity
//! can vanish for a nonzero solution of the right parity, so the functions are
//! continuous in `q` and reduce to `cos k theta`, `sin k theta` at `q = 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use super::tridiag::SymTridiagonal;
use crate::error::{Error, Result};

/// Even (`ce`) or odd (`se`) Mathieu function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MathieuKind {
    Ce,
    Se,
}

/// The four Fourier parity classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParityClass {
    /// `ce_{2r}`: cosines of even harmonics `0, 2, 4, ...`.
    CeEven,
    /// `ce_{2r+1}`: cosines of odd harmonics `1, 3, 5, ...`.
    CeOdd,
    /// `se_{2r+1}`: sines of odd harmonics `1, 3, 5, ...`.
    SeOdd,
    /// `se_{2r+2}`: sines of even harmonics `2, 4, 6, ...`.
    SeEven,
}

impl ParityClass {
    /// Class and index `r` within the class for order `k`.
    pub fn of(kind: MathieuKind, k: usize) -> Result<(Self, usize)> {
        match kind {
            MathieuKind::Ce if k % 2 == 0 => Ok((Self::CeEven, k / 2)),
            MathieuKind::Ce => Ok((Self::CeOdd, k / 2)),
            MathieuKind::Se if k == 0 => Err(Error::InvalidArgument("se_k needs k >= 1".into())),
            MathieuKind::Se if k % 2 == 1 => Ok((Self::SeOdd, k / 2)),
            MathieuKind::Se => Ok((Self::SeEven, k / 2 - 1)),
        }
    }

    pub fn kind(self) -> MathieuKind {
        match self {
            Self::CeEven | Self::CeOdd => MathieuKind::Ce,
            Self::SeOdd | Self::SeEven => MathieuKind::Se,
        }
    }

    /// Order `k` of the `r`-th function of the class.
    pub fn order(self, r: usize) -> usize {
        match self {
            Self::CeEven => 2 * r,
            Self::CeOdd | Self::SeOdd => 2 * r + 1,
            Self::SeEven => 2 * r + 2,
        }
    }

    pub fn first_harmonic(self) -> usize {
        match self {
            Self::CeEven => 0,
            Self::CeOdd | Self::SeOdd => 1,
            Self::SeEven => 2,
        }
    }

    /// The `m x m` recurrence matrix at parameter `q`.
    pub fn matrix(self, q: f64, m: usize) -> SymTridiagonal {
        let p = self.first_harmonic();
        let mut diag: Vec<f64> = (0..m).map(|j| ((p + 2 * j) as f64).powi(2)).collect();
        let mut off = vec![q; m - 1];
        match self {
            Self::CeEven => {
                if m > 1 {
                    off[0] = SQRT_2 * q;
                }
            }
            Self::CeOdd => diag[0] += q,
            Self::SeOdd => diag[0] -= q,
            Self::SeEven => {}
        }
        SymTridiagonal::new(diag, off)
    }
}

/// A Mathieu function stored as its truncated Fourier series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathieuFunction {
    pub kind: MathieuKind,
    pub order: usize,
    pub q: f64,
    /// `a_k(q)` for `ce`, `b_k(q)` for `se`.
    pub char_value: f64,
    /// Coefficient `j` multiplies `cos` or `sin` of harmonic
    /// `first_harmonic + 2 j`.
    pub fourier_coeffs: Vec<f64>,
    pub first_harmonic: usize,
    pub truncation: usize,
}

impl MathieuFunction {
    /// Builds `ce_k` or `se_k` with automatic, convergence-checked truncation.
    pub fn new(kind: MathieuKind, k: usize, q: f64) -> Result<Self> {
        let (class, r) = ParityClass::of(kind, k)?;
        Ok(class_functions(class, q, r + 1)?.pop().expect("r + 1 functions"))
    }

    /// Builds `ce_k` or `se_k` at a fixed truncation `m`, with no
    /// convergence check.
    pub fn with_truncation(kind: MathieuKind, k: usize, q: f64, m: usize) -> Result<Self> {
        check_q(q)?;
        let (class, r) = ParityClass::of(kind, k)?;
        if m <= r {
            return Err(Error::InvalidArgument(format!("truncation {m} too small for order {k}")));
        }
        let mat = class.matrix(q, m);
        let value = mat.eigenvalue(r);
        Ok(from_eigenpair(class, r, q, value, mat.eigenvector(value)))
    }

    pub fn harmonic(&self, j: usize) -> usize {
        self.first_harmonic + 2 * j
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.series(theta, |_, c| c)
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        self.fourier_coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let n = self.harmonic(j) as f64;
                match self.kind {
                    MathieuKind::Ce => -n * c * (n * theta).sin(),
                    MathieuKind::Se => n * c * (n * theta).cos(),
                }
            })
            .sum()
    }

    pub fn second_derivative(&self, theta: f64) -> f64 {
        self.series(theta, |n, c| -n * n * c)
    }

    fn series(&self, theta: f64, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.fourier_coeffs.iter().enumerate().rev() {
            let n = self.harmonic(j) as f64;
            let basis = match self.kind {
                MathieuKind::Ce => (n * theta).cos(),
                MathieuKind::Se => (n * theta).sin(),
            };
            acc += weight(n, c) * basis;
        }
        acc
    }

    /// Sup over an `n`-point grid on `[0, 2 pi)` of
    /// `|y'' + (a - 2 q cos 2 theta) y|`.
    pub fn ode_residual(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                let y = self.eval(th);
                (self.second_derivative(th) + (self.char_value - 2.0 * self.q * (2.0 * th).cos()) * y).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q >= 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Mathieu parameter q must be finite and >= 0, got {q}")))
    }
}

fn from_eigenpair(class: ParityClass, r: usize, q: f64, value: f64, mut v: Vec<f64>) -> MathieuFunction {
    let m = v.len();
    if class == ParityClass::CeEven {
        v[0] /= SQRT_2;
    }
    let p = class.first_harmonic();
    let at_zero: f64 = match class.kind() {
        MathieuKind::Ce => v.iter().sum(),
        MathieuKind::Se => v.iter().enumerate().map(|(j, c)| (p + 2 * j) as f64 * c).sum(),
    };
    if at_zero < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    MathieuFunction {
        kind: class.kind(),
        order: class.order(r),
        q,
        char_value: value,
        fourier_coeffs: v,
        first_harmonic: class.first_harmonic(),
        truncation: m,
    }
}

/// Starting truncation for the `count` lowest functions of a class.
pub fn truncation_for(count: usize, q: f64) -> usize {
    32usize.max(count + 20 + (1.5 * q.sqrt()).ceil() as usize)
}

/// The `count` lowest functions `r = 0, ..., count - 1` of one parity class.
///
/// The truncation starts at [`truncation_for`]; values at `M` and `2M` must
/// agree to `1e-10 max(1, |a|)`, with one further doubling allowed.
pub fn class_functions(class: ParityClass, q: f64, count: usize) -> Result<Vec<MathieuFunction>> {
    class_functions_from(class, q, count, 0)
}

/// As [`class_functions`], starting from truncation at least `min_truncation`.
pub fn class_functions_from(
    class: ParityClass,
    q: f64,
    count: usize,
    min_truncation: usize,
) -> Result<Vec<MathieuFunction>> {
    check_q(q)?;
    let mut m = truncation_for(count, q).max(min_truncation);
    let mut prev: Vec<f64> = {
        let mat = class.matrix(q, m);
        (0..count).map(|r| mat.eigenvalue(r)).collect()
    };
    for _ in 0..2 {
        m *= 2;
        let mat = class.matrix(q, m);
        let values: Vec<f64> = (0..count).map(|r| mat.eigenvalue(r)).collect();
        let converged = values
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= 1e-10 * a.abs().max(1.0));
        if converged {
            return Ok(values
                .iter()
                .enumerate()
                .map(|(r, &v)| from_eigenpair(class, r, q, v, mat.eigenvector(v)))
                .collect());
        }
        prev = values;
    }
    Err(Error::NoConvergence(format!(
        "Mathieu {class:?} characteristic values at q = {q} did not settle up to truncation {m}"
    )))
}

/// `a_k(q)` for `ce`, `b_k(q)` for `se`.
pub fn mathieu_char(q: f64, k: usize, kind: MathieuKind) -> Result<f64> {
    Ok(MathieuFunction::new(kind, k, q)?.char_value)
}

/// `ce_k(theta, q)` or `se_k(theta, q)`.
pub fn mathieu_eval(q: f64, k: usize, kind: MathieuKind, theta: f64) -> Result<f64> {
    Ok(MathieuFunction::new(kind, k, q)?.eval(theta))
}

/// One row of a characteristic-value table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MathieuTableRow {
    pub k: usize,
    pub q: f64,
    pub a: f64,
    /// `b_k(q)`; absent for `k = 0`.
    pub b: Option<f64>,
}

/// `a_k(q)` and `b_k(q)` for `k = 0..=k_max` at each `q`.
pub fn mathieu_table(k_max: usize, qs: &[f64]) -> Result<Vec<MathieuTableRow>> {
    let mut rows = Vec::with_capacity((k_max + 1) * qs.len());
    for &q in qs {
        let count = k_max / 2 + 1;
        let ce_even = class_functions(ParityClass::CeEven, q, count)?;
        let ce_odd = class_functions(ParityClass::CeOdd, q, count)?;
        let se_odd = class_functions(ParityClass::SeOdd, q, count)?;
        let se_even = class_functions(ParityClass::SeEven, q, count)?;
        for k in 0..=k_max {
            let a = if k % 2 == 0 { &ce_even[k / 2] } else { &ce_odd[k / 2] }.char_value;
            let b = match k {
                0 => None,
                k if k % 2 == 1 => Some(se_odd[k / 2].char_value),
                k => Some(se_even[k / 2 - 1].char_value),
            };
            rows.push(MathieuTableRow { k, q, a, b });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| f(h * i as f64)).sum::<f64>() * h
    }

    #[test]
    fn q_zero_values_are_squares() {
        for k in 0..=8 {
            assert!((mathieu_char(0.0, k, MathieuKind::Ce).unwrap() - (k * k) as f64).abs() < 1e-10);
            if k > 0 {
                assert!((mathieu_char(0.0, k, MathieuKind::Se).unwrap() - (k * k) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn q_zero_functions_are_trigonometric() {
        let ce0 = MathieuFunction::new(MathieuKind::Ce, 0, 0.0).unwrap();
        let ce2 = MathieuFunction::new(MathieuKind::Ce, 2, 0.0).unwrap();
        let se3 = MathieuFunction::new(MathieuKind::Se, 3, 0.0).unwrap();
        for i in 0..50 {
            let th = 0.13 * i as f64;
            assert!((ce0.eval(th) - 1.0 / SQRT_2).abs() < 1e-12);
            assert!((ce2.eval(th) - (2.0 * th).cos()).abs() < 1e-12);
            assert!((se3.eval(th) - (3.0 * th).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn normalisation_orthogonality_and_ode() {
        for &q in &[0.25, 1.0, 4.0, 25.0] {
            let fs: Vec<MathieuFunction> = (0..6)
                .map(|k| MathieuFunction::new(MathieuKind::Ce, k, q).unwrap())
                .chain((1..6).map(|k| MathieuFunction::new(MathieuKind::Se, k, q).unwrap()))
                .collect();
            for (i, f) in fs.iter().enumerate() {
                for (j, g) in fs.iter().enumerate() {
                    let ip = trapezoid(512, |t| f.eval(t) * g.eval(t));
                    let want = if i == j { PI } else { 0.0 };
                    assert!((ip - want).abs() < 1e-8, "q={q} {i} {j}: {ip}");
                }
                assert!(f.ode_residual(512) < 1e-8 * f.char_value.abs().max(1.0), "q={q}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for kind in [MathieuKind::Ce, MathieuKind::Se] {
            let f = MathieuFunction::new(kind, 3, 2.0).unwrap();
            let h = 1e-5;
            let th = 0.7;
            let fd = (f.eval(th + h) - f.eval(th - h)) / (2.0 * h);
            assert!((f.derivative(th) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn interlacing() {
        for &q in &[0.25, 1.0, 4.0] {
            let mut prev = mathieu_char(q, 0, MathieuKind::Ce).unwrap();
            for k in 1..8 {
                let b = mathieu_char(q, k, MathieuKind::Se).unwrap();
                let a = mathieu_char(q, k, MathieuKind::Ce).unwrap();
                assert!(prev < b && b <= a, "q={q}, k={k}");
                prev = a;
            }
        }
    }

    #[test]
    fn parity() {
        let c = MathieuFunction::new(MathieuKind::Ce, 2, 1.5).unwrap();
        let s = MathieuFunction::new(MathieuKind::Se, 2, 1.5).unwrap();
        for th in [0.2, 1.1, 2.9] {
            assert_eq!(c.eval(th), c.eval(-th));
            assert_eq!(s.eval(th), -s.eval(-th));
        }
    }

    #[test]
    fn se_zero_is_rejected() {
        assert!(MathieuFunction::new(MathieuKind::Se, 0, 1.0).is_err());
        assert!(mathieu_char(-1.0, 0, MathieuKind::Ce).is_err());
    }
}
