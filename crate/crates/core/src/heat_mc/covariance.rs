use serde::{Deserialize, Serialize};

use super::{PathGrid, DIFFUSION_RATE};
use crate::algebra::Regime;
use crate::error::{non_finite, Result};
use crate::linalg::{mat2_scale, mat2_vec, Vec2};
use crate::representation::{expm2_series, AffineRep};

/// Rule used to integrate along the path grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Midpoints of the grid cells, with the path interpolated linearly.
    Midpoint,
}

/// The conditional covariance `Sigma` of `(x, y)` given one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceAccumulator {
    pub sigma: [[f64; 2]; 2],
    pub det: f64,
}

impl CovarianceAccumulator {
    pub fn from_entries(s11: f64, s12: f64, s22: f64) -> Self {
        Self {
            sigma: [[s11, s12], [s12, s22]],
            det: s11 * s22 - s12 * s12,
        }
    }

    pub fn trace(&self) -> f64 {
        self.sigma[0][0] + self.sigma[1][1]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = 0.5 * self.trace();
        let d = 0.5 * (self.sigma[0][0] - self.sigma[1][1]);
        m - (d * d + self.sigma[0][1] * self.sigma[0][1]).sqrt()
    }

    /// Density of `N(0, Sigma)` at `v`.
    pub fn gaussian_density(&self, v: &Vec2) -> f64 {
        let [[s11, s12], [_, s22]] = self.sigma;
        let q = (s22 * v[0] * v[0] - 2.0 * s12 * v[0] * v[1] + s11 * v[1] * v[1]) / self.det;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * self.det.sqrt())
    }
}

/// `exp(u A) ybar` written out for each regime.
pub fn covariance_vector(rep: &AffineRep, u: f64) -> Vec2 {
    match rep.regime {
        Regime::Rank1Heisenberg => [u, 1.0],
        Regime::Rank1BetaPos { beta } => [(beta * u).exp(), 1.0],
        Regime::DeltaPos { lambda1, lambda2 } => [-lambda1 * (lambda1 * u).exp(), lambda2 * (lambda2 * u).exp()],
        Regime::DeltaNeg { rho, omega, theta0 } => {
            let r = (rho * rho + omega * omega).sqrt();
            let e = -r * (rho * u).exp();
            let (s, c) = (omega * u - theta0).sin_cos();
            [e * c, e * s]
        }
        Regime::DeltaZero { lambda } => {
            let e = (lambda * u).exp();
            [e * (lambda - 1.0 - lambda * u), -e * lambda]
        }
    }
}

/// Weighted sample nodes `(u, weight)` with `u = B(s) - beta s`; the weights
/// include the diffusion rate.
fn for_each_node(values: &[f64], t: f64, beta: f64, quad: Quadrature, mut visit: impl FnMut(f64, f64)) {
    let n = values.len() - 1;
    let dt = t / n as f64;
    let w = DIFFUSION_RATE * dt;
    match quad {
        Quadrature::Trapezoid => {
            for (i, b) in values.iter().enumerate() {
                let wi = if i == 0 || i == n { 0.5 * w } else { w };
                visit(b - beta * (i as f64 * dt), wi);
            }
        }
        Quadrature::Midpoint => {
            for i in 0..n {
                let b = 0.5 * (values[i] + values[i + 1]);
                visit(b - beta * ((i as f64 + 0.5) * dt), w);
            }
        }
    }
}

pub(crate) fn accumulate(
    values: &[f64],
    t: f64,
    beta: f64,
    quad: Quadrature,
    vector: impl Fn(f64) -> Vec2,
) -> Result<CovarianceAccumulator> {
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    let mut umax: f64 = 0.0;
    for_each_node(values, t, beta, quad, |u, w| {
        let v = vector(u);
        umax = umax.max(u.abs());
        s11 += w * v[0] * v[0];
        s12 += w * v[0] * v[1];
        s22 += w * v[1] * v[1];
    });
    let acc = CovarianceAccumulator::from_entries(s11, s12, s22);
    if !(acc.det.is_finite() && s11.is_finite() && s22.is_finite()) {
        return Err(non_finite(
            "heat_mc",
            format!("covariance overflow, max |B(s) - beta s| = {umax:.3}; reduce t"),
        ));
    }
    Ok(acc)
}

/// `Sigma` along `path` from the closed-form integrand of the regime.
pub fn covariance_along_path(rep: &AffineRep, path: &PathGrid, quad: Quadrature) -> Result<CovarianceAccumulator> {
    accumulate(&path.values, path.t, rep.beta(), quad, |u| covariance_vector(rep, u))
}

/// `Sigma` along `path` with `exp(u A)` taken from the generic series.
pub fn covariance_along_path_generic(
    rep: &AffineRep,
    path: &PathGrid,
    quad: Quadrature,
) -> Result<CovarianceAccumulator> {
    accumulate(&path.values, path.t, rep.beta(), quad, |u| {
        mat2_vec(&expm2_series(&mat2_scale(&rep.a, u)), &rep.ybar)
    })
}
