use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{covariance_vector, DIFFUSION_RATE};
use crate::error::{non_finite, Error, Result};
use crate::linalg::mean_and_std_error;
use crate::representation::{AffineRep, GroupPoint};
use crate::rng::{sample_rng, DEFAULT_SEED};

/// Point index reserved for endpoint sampling streams.
pub const ENDPOINT_STREAM: u64 = u64::MAX;

/// Settings for direct simulation of the diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

impl Default for SdeSpec {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            n_steps: 256,
            seed: DEFAULT_SEED,
        }
    }
}

/// One endpoint `Z(t)` of the diffusion started at the identity, by an
/// Euler-Maruyama sum for the stochastic integral. `theta` is exact.
pub fn sde_endpoint_sample<R: Rng + ?Sized>(rep: &AffineRep, t: f64, n_steps: usize, rng: &mut R) -> Result<GroupPoint> {
    let dt = t / n_steps as f64;
    let sd = (DIFFUSION_RATE * dt).sqrt();
    let beta = rep.beta();
    let (mut b, mut x, mut y) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..n_steps {
        let v = covariance_vector(rep, b - beta * (i as f64 * dt));
        let dw: f64 = rng.sample(StandardNormal);
        let db: f64 = rng.sample(StandardNormal);
        x += v[0] * sd * dw;
        y += v[1] * sd * dw;
        b += sd * db;
    }
    let p = GroupPoint::new(b - beta * t, x, y);
    if p.is_finite() {
        Ok(p)
    } else {
        Err(non_finite("heat_mc", "diffusion endpoint overflowed"))
    }
}

/// `spec.n_paths` independent endpoints; path `i` uses stream
/// `(ENDPOINT_STREAM, i)`, so the output is independent of thread count.
pub fn sample_endpoints(rep: &AffineRep, t: f64, spec: &SdeSpec) -> Result<Vec<GroupPoint>> {
    if !(t > 0.0 && t.is_finite()) || spec.n_steps == 0 || spec.n_paths == 0 {
        return Err(Error::InvalidArgument("need t > 0, n_steps >= 1 and n_paths >= 1".into()));
    }
    (0..spec.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(spec.seed, ENDPOINT_STREAM, i as u64);
            sde_endpoint_sample(rep, t, spec.n_steps, &mut rng)
        })
        .collect()
}

/// Monte Carlo value of `P_t f (base) = E f(base Z(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemigroupEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// Estimates `P_t f` at `base`. At `t = 0` the value is `f(base)` exactly.
pub fn semigroup_estimate(
    rep: &AffineRep,
    f: &(dyn Fn(&GroupPoint) -> f64 + Sync),
    base: &GroupPoint,
    t: f64,
    spec: &SdeSpec,
) -> Result<SemigroupEstimate> {
    if t == 0.0 {
        return Ok(SemigroupEstimate {
            mean: f(base),
            std_error: 0.0,
            n_paths: 0,
        });
    }
    let ends = sample_endpoints(rep, t, spec)?;
    let values: Vec<f64> = ends.par_iter().map(|z| f(&rep.group_mul(base, z))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(non_finite("heat_mc", "test function returned a non-finite value"));
    }
    let (mean, std_error) = mean_and_std_error(&values);
    Ok(SemigroupEstimate {
        mean,
        std_error,
        n_paths: spec.n_paths,
    })
}
