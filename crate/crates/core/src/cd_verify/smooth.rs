use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::representation::{AffineRep, GroupPoint};

/// A function with an available coordinate gradient `(d/dtheta, d/dx, d/dy)`.
pub trait SmoothFunction: Sync {
    fn value(&self, p: &GroupPoint) -> f64;
    fn gradient(&self, p: &GroupPoint) -> [f64; 3];
}

/// `(Xf, Yf, Rf)` at `p`.
pub fn frame_derivatives(rep: &AffineRep, f: &dyn SmoothFunction, p: &GroupPoint) -> [f64; 3] {
    let g = f.gradient(p);
    let c = rep.field_coeffs(p.theta);
    [
        g[0],
        c.y_coeff[0] * g[1] + c.y_coeff[1] * g[2],
        c.r_coeff[0] * g[1] + c.r_coeff[1] * g[2],
    ]
}

/// `(Gamma(f), Gamma^R(f))` at `p`.
pub fn gamma_pair(rep: &AffineRep, f: &dyn SmoothFunction, p: &GroupPoint) -> (f64, f64) {
    let [x, y, r] = frame_derivatives(rep, f, p);
    (x * x + y * y, r * r)
}

/// `phi(|p - center|^2 / radius^2)` with `phi(s) = (1 - s)^(order + 1)` on
/// `s < 1` and zero outside, a `C^order` bump in the coordinates `(theta, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: GroupPoint,
    pub radius: f64,
    pub order: u32,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: GroupPoint, radius: f64) -> Self {
        Self {
            center,
            radius,
            order: 3,
            amplitude: 1.0,
        }
    }

    fn offset(&self, p: &GroupPoint) -> ([f64; 3], f64) {
        let d = [p.theta - self.center.theta, p.x - self.center.x, p.y - self.center.y];
        let s = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (self.radius * self.radius);
        (d, s)
    }
}

impl SmoothFunction for Bump {
    fn value(&self, p: &GroupPoint) -> f64 {
        let (_, s) = self.offset(p);
        if s >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - s).powi(self.order as i32 + 1)
        }
    }

    fn gradient(&self, p: &GroupPoint) -> [f64; 3] {
        let (d, s) = self.offset(p);
        if s >= 1.0 {
            return [0.0; 3];
        }
        let m = self.order as i32 + 1;
        let dphi = -(m as f64) * (1.0 - s).powi(m - 1) * self.amplitude;
        let k = dphi * 2.0 / (self.radius * self.radius);
        [k * d[0], k * d[1], k * d[2]]
    }
}

/// A symbolic expression with its coordinate derivatives precomputed.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    pub f: Expr,
    grad: [Expr; 3],
}

impl CompiledExpr {
    pub fn new(f: Expr) -> Self {
        let grad = [f.d_theta(), f.d_x(), f.d_y()];
        Self { f, grad }
    }
}

impl SmoothFunction for CompiledExpr {
    fn value(&self, p: &GroupPoint) -> f64 {
        self.f.eval(p)
    }

    fn gradient(&self, p: &GroupPoint) -> [f64; 3] {
        [self.grad[0].eval(p), self.grad[1].eval(p), self.grad[2].eval(p)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_gradient_matches_differences() {
        let b = Bump::new(GroupPoint::new(0.1, -0.2, 0.3), 1.2);
        let p = GroupPoint::new(0.4, 0.1, -0.2);
        let g = b.gradient(&p);
        let h = 1e-6;
        let shifts = [(h, 0.0, 0.0), (0.0, h, 0.0), (0.0, 0.0, h)];
        for (i, (a, x, y)) in shifts.iter().enumerate() {
            let plus = b.value(&GroupPoint::new(p.theta + a, p.x + x, p.y + y));
            let minus = b.value(&GroupPoint::new(p.theta - a, p.x - x, p.y - y));
            assert!(((plus - minus) / (2.0 * h) - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let b = Bump::new(GroupPoint::IDENTITY, 0.5);
        let p = GroupPoint::new(0.3, 0.3, 0.3);
        assert_eq!(b.value(&p), 0.0);
        assert_eq!(b.gradient(&p), [0.0; 3]);
        assert_eq!(b.value(&GroupPoint::IDENTITY), 1.0);
    }
}
