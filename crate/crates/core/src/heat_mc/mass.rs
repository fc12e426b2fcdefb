use serde::{Deserialize, Serialize};

use super::{kernel_slice_estimates, McSpec};
use crate::error::{Error, Result};
use crate::representation::AffineRep;

/// A uniform axis with `n` nodes from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn symmetric(half_width: f64, n: usize) -> Self {
        Self {
            min: -half_width,
            max: half_width,
            n,
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + (self.max - self.min) * i as f64 / (self.n - 1) as f64
    }

    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let h = (self.max - self.min) / (self.n - 1) as f64;
        if i == 0 || i == self.n - 1 {
            0.5 * h
        } else {
            h
        }
    }
}

/// Tensor grid in `(theta, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta: Axis,
    pub x: Axis,
    pub y: Axis,
}

impl GridSpec {
    pub fn cube(half_width: f64, n: usize) -> Self {
        let a = Axis::symmetric(half_width, n);
        Self { theta: a, x: a, y: a }
    }
}

/// Trapezoid integral of the Monte Carlo kernel over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub t: f64,
    pub grid: GridSpec,
    pub spec: McSpec,
    pub mass: f64,
    /// Contribution of `x > 0`, with the `x = 0` plane counted half.
    pub half_mass_x_positive: f64,
    pub rejects: usize,
}

/// Integrates the kernel estimate over `grid` with respect to
/// `dtheta dx dy`. Each `theta`-slice shares one pool of bridges.
pub fn kernel_mass_check(rep: &AffineRep, t: f64, grid: &GridSpec, spec: &McSpec) -> Result<MassReport> {
    for a in [&grid.theta, &grid.x, &grid.y] {
        if a.n < 2 || !(a.max > a.min) {
            return Err(Error::InvalidArgument("grid axes need n >= 2 and max > min".into()));
        }
    }
    let mut xy = Vec::with_capacity(grid.x.n * grid.y.n);
    let mut wxy = Vec::with_capacity(grid.x.n * grid.y.n);
    let mut half = Vec::with_capacity(grid.x.n * grid.y.n);
    for i in 0..grid.x.n {
        let x = grid.x.node(i);
        let side = if x > 0.0 {
            1.0
        } else if x == 0.0 {
            0.5
        } else {
            0.0
        };
        for j in 0..grid.y.n {
            xy.push((x, grid.y.node(j)));
            wxy.push(grid.x.trapezoid_weight(i) * grid.y.trapezoid_weight(j));
            half.push(side);
        }
    }
    let mut mass = 0.0;
    let mut half_mass = 0.0;
    let mut rejects = 0;
    for k in 0..grid.theta.n {
        let est = kernel_slice_estimates(rep, t, grid.theta.node(k), &xy, spec, k as u64)?;
        rejects += est.first().map_or(0, |e| e.rejects);
        let wt = grid.theta.trapezoid_weight(k);
        for ((e, w), s) in est.iter().zip(&wxy).zip(&half) {
            mass += wt * w * e.value;
            half_mass += wt * w * s * e.value;
        }
    }
    Ok(MassReport {
        t,
        grid: *grid,
        spec: *spec,
        mass,
        half_mass_x_positive: half_mass,
        rejects,
    })
}
