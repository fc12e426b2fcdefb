//! Reference heat kernel in any regime from the Fourier transform in `(x, y)`.
//!
//! With `p^(theta; xi) = int e^{-i xi.v} p(theta, v) dv`, the density of the
//! diffusion generated by `L` solves the forward equation
//!
//! ```text
//! d/dt p^ = p^'' + beta p^' - (xi . exp(theta A) ybar)^2 p^
//! ```
//!
//! from `p^ = delta(theta)`. Each frequency is an independent real parabolic
//! problem in `theta`, solved here by Crank-Nicolson. The kernel is recovered
//! by the trapezoid rule on a square lattice of frequencies; `p^` is even in
//! `xi`, so only half the lattice is solved.
//!
//! The initial delta is replaced by the Gaussian of standard deviation `h`
//! (one cell), which is the drift-diffusion solution at time `h^2 / 2`; the
//! integration then starts from that time. Two backward-Euler half steps
//! precede the Crank-Nicolson steps to damp the stiff potential modes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::tridiag::SymTridiagonal;
use crate::error::{non_finite, Error, Result};
use crate::heat_mc::{covariance_vector, DIFFUSION_RATE};
use crate::quadrature::composite_gauss_legendre;
use crate::representation::{AffineRep, GroupPoint};

/// Uniform grid `[-beta t - half_width, -beta t + half_width]` with
/// `n_cells` cells, and `n_steps` time steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub half_width: f64,
    pub n_cells: usize,
    pub n_steps: usize,
}

impl ThetaGrid {
    /// Eight standard deviations of the `theta`-marginal on each side.
    pub fn auto(t: f64, n_cells: usize, n_steps: usize) -> Self {
        Self {
            half_width: 8.0 * (DIFFUSION_RATE * t).sqrt(),
            n_cells,
            n_steps,
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    /// Half the cell size and half the time step.
    pub fn refined(&self) -> Self {
        Self {
            n_cells: 2 * self.n_cells,
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }

    /// Twice the cell size and twice the time step.
    pub fn coarsened(&self) -> Self {
        Self {
            n_cells: self.n_cells / 2,
            n_steps: self.n_steps / 2,
            ..*self
        }
    }
}

/// `p^(t, theta; xi)` on a uniform `theta` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSlice {
    pub xi: [f64; 2],
    pub t: f64,
    pub theta_start: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl FourierSlice {
    pub fn theta(&self, i: usize) -> f64 {
        self.theta_start + self.h * i as f64
    }

    /// Cubic interpolation; zero outside the grid.
    pub fn interpolate(&self, theta: f64) -> f64 {
        let n = self.values.len();
        let s = (theta - self.theta_start) / self.h;
        if !(s >= 0.0 && s <= (n - 1) as f64) {
            return 0.0;
        }
        let i0 = (s.floor() as usize).clamp(1, n - 3) - 1;
        let mut acc = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - (i0 + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.values[i0 + a];
        }
        acc
    }

    /// Largest magnitude next to the two (zero) boundary nodes.
    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.values.len();
        self.values[1].abs().max(self.values[n - 2].abs())
    }
}

const BOUNDARY_TOLERANCE: f64 = 1e-10;
const ENLARGEMENTS: usize = 2;

/// Solves the transformed heat equation at frequency `xi` up to time `t`.
///
/// If the solution at either end of the grid exceeds `1e-10` the half-width
/// is enlarged by half (keeping `h`), at most twice.
pub fn fourier_ode_oracle(rep: &AffineRep, t: f64, xi: [f64; 2], grid: &ThetaGrid) -> Result<FourierSlice> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    if grid.n_cells < 8 || grid.n_steps < 2 || !(grid.half_width > 0.0) {
        return Err(Error::InvalidArgument("theta grid needs n_cells >= 8, n_steps >= 2".into()));
    }
    let mut g = *grid;
    for attempt in 0..=ENLARGEMENTS {
        let slice = solve_slice(rep, t, xi, &g)?;
        let leak = slice.boundary_magnitude();
        if leak <= BOUNDARY_TOLERANCE {
            return Ok(slice);
        }
        if attempt == ENLARGEMENTS {
            let n = slice.values.len();
            let theta = if slice.values[1].abs() >= leak { slice.theta(1) } else { slice.theta(n - 2) };
            return Err(Error::BoundaryMassLeak { magnitude: leak, theta });
        }
        let cells = (g.n_cells as f64 * 1.5).round() as usize;
        g = ThetaGrid {
            half_width: g.half_width * cells as f64 / g.n_cells as f64,
            n_cells: cells,
            n_steps: g.n_steps,
        };
    }
    unreachable!("loop returns on its last attempt")
}

/// Crank-Nicolson matrix `I - (dt/2) L_h` factorised once for Thomas solves.
struct Factored {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Factored {
    fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_u = 0.0;
        for i in 0..n {
            let piv = diag[i] - if i > 0 { lower[i] * prev_u } else { 0.0 };
            inv_pivot[i] = 1.0 / piv;
            prev_u = if i + 1 < n { upper[i] / piv } else { 0.0 };
            upper_mod[i] = prev_u;
        }
        Self {
            lower: lower.to_vec(),
            upper_mod,
            inv_pivot,
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

fn solve_slice(rep: &AffineRep, t: f64, xi: [f64; 2], grid: &ThetaGrid) -> Result<FourierSlice> {
    let beta = rep.beta();
    let h = grid.h();
    let start = -beta * t - grid.half_width;
    // Interior nodes 1..n_cells-1; the end nodes are held at zero.
    let n = grid.n_cells - 1;
    let theta = |i: usize| start + h * (i + 1) as f64;
    let potential: Vec<f64> = (0..n)
        .map(|i| {
            let c = covariance_vector(rep, theta(i));
            let s = xi[0] * c[0] + xi[1] * c[1];
            s * s
        })
        .collect();
    if potential.iter().any(|v| !v.is_finite()) {
        return Err(non_finite("heat_spectral", format!("potential overflow on theta grid for xi = {xi:?}")));
    }

    let t0 = 0.5 * h * h;
    if t0 >= t {
        return Err(Error::InvalidArgument("theta cell too coarse for this t".into()));
    }
    let dt = (t - t0) / grid.n_steps as f64;
    let v0 = {
        let c = covariance_vector(rep, 0.0);
        let s = xi[0] * c[0] + xi[1] * c[1];
        s * s
    };
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let z = (theta(i) + beta * t0) / h;
            (-0.5 * z * z).exp() / (h * (2.0 * PI).sqrt()) * (-v0 * t0).exp()
        })
        .collect();

    // L_h u_i = a u_{i-1} + (-2/h^2 - V_i) u_i + b u_{i+1}
    let a = 1.0 / (h * h) - beta / (2.0 * h);
    let b = 1.0 / (h * h) + beta / (2.0 * h);
    let k = 0.5 * dt;
    let lower = vec![-k * a; n];
    let upper = vec![-k * b; n];
    let diag: Vec<f64> = potential.iter().map(|v| 1.0 + k * (2.0 / (h * h) + v)).collect();
    let implicit = Factored::new(&lower, &diag, &upper);

    // Two backward-Euler steps of dt/2 share the matrix I - (dt/2) L_h.
    implicit.solve(&mut u);
    implicit.solve(&mut u);
    let mut rhs = vec![0.0; n];
    for _ in 1..grid.n_steps {
        for i in 0..n {
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            rhs[i] = u[i] + k * (a * left + b * right - (2.0 / (h * h) + potential[i]) * u[i]);
        }
        std::mem::swap(&mut u, &mut rhs);
        implicit.solve(&mut u);
    }

    let mut values = Vec::with_capacity(n + 2);
    values.push(0.0);
    values.extend_from_slice(&u);
    values.push(0.0);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(non_finite("heat_spectral", format!("Crank-Nicolson solution overflowed for xi = {xi:?}")));
    }
    Ok(FourierSlice {
        xi,
        t,
        theta_start: start,
        h,
        values,
    })
}

/// Settings for [`oracle_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// `None` uses [`ThetaGrid::auto`] with the cell and step counts below.
    pub grid: Option<ThetaGrid>,
    pub n_cells: usize,
    pub n_steps: usize,
    /// Lattice spacing in `xi`; `None` uses `2 pi / P` with aliasing period
    /// `P = 2 max(|x|, |y|) + 12 sigma`, where `sigma^2` is the largest
    /// eigenvalue of the mean conditional covariance `E Sigma`.
    pub xi_spacing: Option<f64>,
    /// A square shell of the lattice is negligible once every `|p^|` on it is
    /// below this fraction of the largest `|p^|` seen.
    pub shell_tolerance: f64,
    pub max_shells: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid: None,
            n_cells: 512,
            n_steps: 128,
            xi_spacing: None,
            shell_tolerance: 1e-8,
            max_shells: 400,
        }
    }
}

/// Oracle value of the heat kernel at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub point: GroupPoint,
    pub t: f64,
    /// Richardson extrapolation `(4 v_h - v_2h) / 3` of the values on the
    /// configured grid and on the grid with doubled cell and time step.
    pub value: f64,
    /// `resolution_error + aliasing_error`.
    pub error_estimate: f64,
    /// `|v_h - v_2h| / 3`, the second-order estimate of the error in `v_h`.
    pub resolution_error: f64,
    /// Change when the `xi` spacing is doubled.
    pub aliasing_error: f64,
    pub xi_spacing: f64,
    /// Largest `|xi|_inf` on the lattice used.
    pub xi_extent: f64,
    pub grid: ThetaGrid,
}

/// `E Sigma = 2 int_0^t E[c(u) c(u)^T] ds` with `u ~ N(-beta s, 2 s)`, by
/// Gauss-Legendre in `s` and Gauss-Hermite in `u`; returns its largest
/// eigenvalue.
pub fn mean_covariance_scale(rep: &AffineRep, t: f64) -> f64 {
    let (s_nodes, s_weights) = composite_gauss_legendre(0.0, t, 4, 8);
    let (z, wz) = gauss_hermite(24);
    let beta = rep.beta();
    let mut m = [0.0f64; 3];
    for (&s, &ws) in s_nodes.iter().zip(&s_weights) {
        let sd = (DIFFUSION_RATE * s).sqrt();
        for (&zi, &wi) in z.iter().zip(&wz) {
            let c = covariance_vector(rep, -beta * s + sd * zi);
            let w = DIFFUSION_RATE * ws * wi;
            m[0] += w * c[0] * c[0];
            m[1] += w * c[0] * c[1];
            m[2] += w * c[1] * c[1];
        }
    }
    let mean = 0.5 * (m[0] + m[2]);
    let d = 0.5 * (m[0] - m[2]);
    mean + (d * d + m[1] * m[1]).sqrt()
}

/// Nodes and weights for `E f(Z)`, `Z ~ N(0, 1)` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = SymTridiagonal::new(vec![0.0; n], (1..n).map(|k| (k as f64).sqrt()).collect());
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 0..n {
        let x = jacobi.eigenvalue(k);
        let v = jacobi.eigenvector(x);
        nodes.push(x);
        weights.push(v[0] * v[0]);
    }
    (nodes, weights)
}

/// Half of the square shell `max(|i|, |j|) = s`: points with `j > 0`, or
/// `j = 0` and `i > 0`, plus the origin for `s = 0`.
fn half_shell(s: i64) -> Vec<(i64, i64)> {
    if s == 0 {
        return vec![(0, 0)];
    }
    let mut out = Vec::with_capacity(4 * s as usize);
    for i in -s..=s {
        out.push((i, s));
    }
    for j in 1..s {
        out.push((-s, j));
        out.push((s, j));
    }
    out.push((s, 0));
    out
}

/// Heat kernel at `points` after time `t` by inverse Fourier quadrature of
/// [`fourier_ode_oracle`] slices. All points share the same slices.
pub fn oracle_kernel(rep: &AffineRep, t: f64, points: &[GroupPoint], config: &OracleConfig) -> Result<Vec<OracleEstimate>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let grid = config.grid.unwrap_or_else(|| ThetaGrid::auto(t, config.n_cells, config.n_steps));
    let coarse = grid.coarsened();
    let dxi = match config.xi_spacing {
        Some(d) => d,
        None => {
            let vmax = points.iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max);
            let sigma = mean_covariance_scale(rep, t).sqrt();
            2.0 * PI / (2.0 * vmax + 12.0 * sigma)
        }
    };
    if !(dxi > 0.0 && dxi.is_finite()) {
        return Err(Error::InvalidArgument("xi spacing must be positive".into()));
    }

    let np = points.len();
    let mut fine = vec![0.0; np];
    let mut rough = vec![0.0; np];
    let mut sparse = vec![0.0; np];
    let mut peak: f64 = 0.0;
    let mut quiet_shells = 0;
    let mut s = 0i64;
    loop {
        if s as usize > config.max_shells {
            return Err(Error::NoConvergence(format!(
                "frequency lattice not exhausted after {} shells (spacing {dxi})",
                config.max_shells
            )));
        }
        let shell = half_shell(s);
        let solved: Vec<Result<(Vec<f64>, Vec<f64>)>> = shell
            .par_iter()
            .map(|&(i, j)| {
                let xi = [dxi * i as f64, dxi * j as f64];
                let f = fourier_ode_oracle(rep, t, xi, &grid)?;
                let c = fourier_ode_oracle(rep, t, xi, &coarse)?;
                Ok((
                    points.iter().map(|p| f.interpolate(p.theta)).collect(),
                    points.iter().map(|p| c.interpolate(p.theta)).collect(),
                ))
            })
            .collect();
        let mut shell_max: f64 = 0.0;
        for (&(i, j), res) in shell.iter().zip(solved) {
            let (vf, vc) = res?;
            let w = if i == 0 && j == 0 { 1.0 } else { 2.0 };
            let xi = [dxi * i as f64, dxi * j as f64];
            for (k, p) in points.iter().enumerate() {
                let phase = (xi[0] * p.x + xi[1] * p.y).cos();
                fine[k] += w * phase * vf[k];
                rough[k] += w * phase * vc[k];
                if i % 2 == 0 && j % 2 == 0 {
                    sparse[k] += w * phase * vf[k];
                }
                shell_max = shell_max.max(vf[k].abs());
            }
        }
        peak = peak.max(shell_max);
        if s >= 2 && shell_max <= config.shell_tolerance * peak {
            quiet_shells += 1;
            if quiet_shells == 2 {
                break;
            }
        } else {
            quiet_shells = 0;
        }
        s += 1;
    }

    let norm = dxi * dxi / (4.0 * PI * PI);
    Ok(points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let value = norm * (4.0 * fine[k] - rough[k]) / 3.0;
            let resolution_error = norm * (fine[k] - rough[k]).abs() / 3.0;
            let aliasing_error = norm * (fine[k] - 4.0 * sparse[k]).abs();
            OracleEstimate {
                point: *p,
                t,
                value,
                error_estimate: resolution_error + aliasing_error,
                resolution_error,
                aliasing_error,
                xi_spacing: dxi,
                xi_extent: dxi * s as f64,
                grid,
            }
        })
        .collect())
}
