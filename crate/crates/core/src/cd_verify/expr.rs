//! Exact arithmetic on finite sums of terms
//! `c x^a y^b theta^k e^(mu theta) trig(nu theta)` with `trig` one of `1`, `cos`, `sin`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::representation::GroupPoint;

/// Default bound on the number of terms an expression may hold.
pub const DEFAULT_TERM_CAP: usize = 50_000;

/// Frequencies and rates closer than this (after scaling by 2^36) share a key.
const KEY_SCALE: f64 = 68_719_476_736.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    One,
    Cos,
    Sin,
}

/// One monomial without its coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub px: u32,
    pub py: u32,
    pub pt: u32,
    pub mu: f64,
    pub trig: Trig,
    /// Non-negative; zero only when `trig` is [`Trig::One`].
    pub nu: f64,
}

type Key = (u32, u32, u32, i64, Trig, i64);

fn quantize(v: f64) -> i64 {
    (v * KEY_SCALE).round() as i64
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        px: 0,
        py: 0,
        pt: 0,
        mu: 0.0,
        trig: Trig::One,
        nu: 0.0,
    };

    fn key(&self) -> Key {
        (self.px, self.py, self.pt, quantize(self.mu), self.trig, quantize(self.nu))
    }

    fn eval(&self, p: &GroupPoint) -> f64 {
        let mut v = p.x.powi(self.px as i32) * p.y.powi(self.py as i32) * p.theta.powi(self.pt as i32);
        if self.mu != 0.0 {
            v *= (self.mu * p.theta).exp();
        }
        match self.trig {
            Trig::One => v,
            Trig::Cos => v * (self.nu * p.theta).cos(),
            Trig::Sin => v * (self.nu * p.theta).sin(),
        }
    }
}

/// Normalises `sign * trig(nu theta)` so that `nu >= 0`; returns `None` for `sin(0)`.
fn trig_term(trig: Trig, nu: f64) -> Option<(f64, Trig, f64)> {
    match trig {
        Trig::One => Some((1.0, Trig::One, 0.0)),
        _ if quantize(nu) == 0 => match trig {
            Trig::Cos => Some((1.0, Trig::One, 0.0)),
            _ => None,
        },
        Trig::Cos => Some((1.0, Trig::Cos, nu.abs())),
        Trig::Sin => Some((nu.signum(), Trig::Sin, nu.abs())),
    }
}

/// Product of two trigonometric factors as a sum of at most two.
fn trig_product(t1: Trig, n1: f64, t2: Trig, n2: f64) -> Vec<(f64, Trig, f64)> {
    use Trig::*;
    let raw: Vec<(f64, Trig, f64)> = match (t1, t2) {
        (One, t) => vec![(1.0, t, n2)],
        (t, One) => vec![(1.0, t, n1)],
        (Cos, Cos) => vec![(0.5, Cos, n1 - n2), (0.5, Cos, n1 + n2)],
        (Sin, Sin) => vec![(0.5, Cos, n1 - n2), (-0.5, Cos, n1 + n2)],
        (Sin, Cos) => vec![(0.5, Sin, n1 + n2), (0.5, Sin, n1 - n2)],
        (Cos, Sin) => vec![(0.5, Sin, n1 + n2), (0.5, Sin, n2 - n1)],
    };
    raw.into_iter()
        .filter_map(|(c, t, n)| trig_term(t, n).map(|(s, t, n)| (c * s, t, n)))
        .collect()
}

/// A finite sum of monomials with real coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expr {
    terms: BTreeMap<Key, (Monomial, f64)>,
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_monomial(Monomial::ONE, c)
    }

    pub fn from_monomial(m: Monomial, c: f64) -> Self {
        let mut e = Self::zero();
        e.push(m, c);
        e
    }

    fn power(px: u32, py: u32, pt: u32) -> Self {
        Self::from_monomial(
            Monomial {
                px,
                py,
                pt,
                ..Monomial::ONE
            },
            1.0,
        )
    }

    pub fn x() -> Self {
        Self::power(1, 0, 0)
    }

    pub fn y() -> Self {
        Self::power(0, 1, 0)
    }

    pub fn theta() -> Self {
        Self::power(0, 0, 1)
    }

    /// `e^(mu theta)`.
    pub fn exp(mu: f64) -> Self {
        Self::from_monomial(Monomial { mu, ..Monomial::ONE }, 1.0)
    }

    /// `cos(nu theta)`.
    pub fn cos(nu: f64) -> Self {
        Self::trig(Trig::Cos, nu)
    }

    /// `sin(nu theta)`.
    pub fn sin(nu: f64) -> Self {
        Self::trig(Trig::Sin, nu)
    }

    fn trig(trig: Trig, nu: f64) -> Self {
        match trig_term(trig, nu) {
            Some((s, trig, nu)) => Self::from_monomial(Monomial { trig, nu, ..Monomial::ONE }, s),
            None => Self::zero(),
        }
    }

    fn push(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let k = m.key();
        let remove = match self.terms.get_mut(&k) {
            Some(entry) => {
                entry.1 += c;
                entry.1 == 0.0
            }
            None => {
                self.terms.insert(k, (m, c));
                false
            }
        };
        if remove {
            self.terms.remove(&k);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.values().map(|(m, c)| (m, *c))
    }

    pub fn eval(&self, p: &GroupPoint) -> f64 {
        self.terms.values().map(|(m, c)| c * m.eval(p)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            out.push(*m, s * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.push(*m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `sum_i c_i e_i`.
    pub fn linear_combination(parts: &[(f64, &Expr)]) -> Self {
        let mut out = Self::zero();
        for (s, e) in parts {
            for (m, c) in e.terms() {
                out.push(*m, s * c);
            }
        }
        out
    }

    /// Product, failing with [`Error::ClassOverflow`] when the result exceeds `cap` terms.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let mut out = Self::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                for (s, trig, nu) in trig_product(m1.trig, m1.nu, m2.trig, m2.nu) {
                    let m = Monomial {
                        px: m1.px + m2.px,
                        py: m1.py + m2.py,
                        pt: m1.pt + m2.pt,
                        mu: m1.mu + m2.mu,
                        trig,
                        nu,
                    };
                    out.push(m, s * c1 * c2);
                }
            }
            if out.len() > cap {
                return Err(Error::ClassOverflow { cap });
            }
        }
        Ok(out)
    }

    pub fn square(&self, cap: usize) -> Result<Self> {
        self.mul(self, cap)
    }

    pub fn d_x(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms().filter(|(m, _)| m.px > 0) {
            out.push(Monomial { px: m.px - 1, ..*m }, c * m.px as f64);
        }
        out
    }

    pub fn d_y(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms().filter(|(m, _)| m.py > 0) {
            out.push(Monomial { py: m.py - 1, ..*m }, c * m.py as f64);
        }
        out
    }

    pub fn d_theta(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            if m.pt > 0 {
                out.push(Monomial { pt: m.pt - 1, ..*m }, c * m.pt as f64);
            }
            if m.mu != 0.0 {
                out.push(*m, c * m.mu);
            }
            match m.trig {
                Trig::One => {}
                Trig::Cos => out.push(Monomial { trig: Trig::Sin, ..*m }, -c * m.nu),
                Trig::Sin => out.push(Monomial { trig: Trig::Cos, ..*m }, c * m.nu),
            }
        }
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (name, p) in [("x", m.px), ("y", m.py), ("theta", m.pt)] {
                match p {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{p}")?,
                }
            }
            if m.mu != 0.0 {
                write!(f, "*exp({}*theta)", m.mu)?;
            }
            match m.trig {
                Trig::One => {}
                Trig::Cos => write!(f, "*cos({}*theta)", m.nu)?,
                Trig::Sin => write!(f, "*sin({}*theta)", m.nu)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: usize = DEFAULT_TERM_CAP;

    fn points() -> Vec<GroupPoint> {
        vec![
            GroupPoint::new(0.3, -0.7, 1.1),
            GroupPoint::new(-1.2, 0.4, 0.2),
            GroupPoint::new(2.0, 1.5, -0.3),
        ]
    }

    #[test]
    fn products_evaluate_pointwise() {
        let a = Expr::cos(2.0).add(&Expr::x().mul(&Expr::sin(0.5), CAP).unwrap());
        let b = Expr::sin(1.5).add(&Expr::exp(-0.3).mul(&Expr::theta(), CAP).unwrap());
        let ab = a.mul(&b, CAP).unwrap();
        for p in points() {
            assert!((ab.eval(&p) - a.eval(&p) * b.eval(&p)).abs() < 1e-13);
        }
    }

    #[test]
    fn pythagoras_collapses() {
        let one = Expr::cos(1.3)
            .square(CAP)
            .unwrap()
            .add(&Expr::sin(1.3).square(CAP).unwrap());
        assert_eq!(one.len(), 1);
        assert!((one.eval(&GroupPoint::new(0.7, 0.0, 0.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn theta_derivative_matches_difference_quotient() {
        let e = Expr::theta()
            .mul(&Expr::exp(0.4), CAP)
            .unwrap()
            .mul(&Expr::cos(1.7), CAP)
            .unwrap()
            .add(&Expr::sin(0.9).mul(&Expr::y(), CAP).unwrap());
        let d = e.d_theta();
        let h = 1e-5;
        for p in points() {
            let fd = (e.eval(&GroupPoint::new(p.theta + h, p.x, p.y)) - e.eval(&GroupPoint::new(p.theta - h, p.x, p.y))) / (2.0 * h);
            assert!((d.eval(&p) - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn overflow_is_reported() {
        let mut e = Expr::zero();
        for k in 0..20 {
            e = e.add(&Expr::cos(k as f64 + 0.5));
        }
        assert!(matches!(e.mul(&e, 30), Err(Error::ClassOverflow { cap: 30 })));
    }

    #[test]
    fn sine_of_zero_vanishes() {
        assert!(Expr::sin(0.0).is_empty());
        assert_eq!(Expr::cos(0.0), Expr::constant(1.0));
        assert_eq!(Expr::sin(-2.0), Expr::sin(2.0).scale(-1.0));
    }
}
