use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::covariance::{accumulate, covariance_vector, CovarianceAccumulator, Quadrature};
use super::{fill_bridge, DIFFUSION_RATE};
use crate::error::{Error, Result};
use crate::linalg::mean_and_std_error;
use crate::representation::{AffineRep, GroupPoint};
use crate::rng::{sample_rng, DEFAULT_SEED};

/// How the `theta`-coordinate of the target point enters the estimator.
///
/// The endpoint's first coordinate is `B(t) - beta t` with `Var B(t) = 2t`.
/// `Drifted` honours that and conditions the bridge on `B(t) = theta + beta t`,
/// with prefactor the `N(-beta t, 2t)` density at `theta`. `Undrifted`
/// conditions on `B(t) = theta` with prefactor the `N(0, 2t)` density. The two agree when `beta = 0`; for
/// `beta > 0` only `Drifted` matches the Fourier oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DriftConvention {
    Undrifted,
    #[default]
    Drifted,
}

/// Density of the `theta`-marginal under the chosen convention.
pub fn gaussian_prefactor(theta: f64, t: f64, beta: f64, conv: DriftConvention) -> f64 {
    let m = match conv {
        DriftConvention::Undrifted => theta,
        DriftConvention::Drifted => theta + beta * t,
    };
    let var = DIFFUSION_RATE * t;
    (-m * m / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

fn bridge_target(theta: f64, t: f64, beta: f64, conv: DriftConvention) -> f64 {
    match conv {
        DriftConvention::Undrifted => theta,
        DriftConvention::Drifted => theta + beta * t,
    }
}

/// Sampling settings shared by the Monte Carlo estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub quadrature: Quadrature,
    pub drift: DriftConvention,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            n_steps: 256,
            seed: DEFAULT_SEED,
            quadrature: Quadrature::Trapezoid,
            drift: DriftConvention::Drifted,
        }
    }
}

/// Monte Carlo value of the heat kernel at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub point: GroupPoint,
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub drift_convention: DriftConvention,
    /// Paths discarded because `det Sigma` fell below the floor.
    pub rejects: usize,
}

/// Rejection floor for `det Sigma`.
fn det_floor(rep: &AffineRep, t: f64) -> f64 {
    let y2 = rep.ybar[0] * rep.ybar[0] + rep.ybar[1] * rep.ybar[1];
    let s = DIFFUSION_RATE * t * y2;
    1e-13 * s * s
}

fn check_inputs(t: f64, spec: &McSpec) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    if spec.n_steps < 2 || spec.n_paths < 2 {
        return Err(Error::InvalidArgument("need n_steps >= 2 and n_paths >= 2".into()));
    }
    Ok(())
}

/// Covariances of `spec.n_paths` bridges ending at `theta`, drawn from the
/// streams of point `point_index`. `None` marks a rejected path.
fn covariance_pool(
    rep: &AffineRep,
    t: f64,
    theta: f64,
    spec: &McSpec,
    point_index: u64,
) -> Result<Vec<Option<CovarianceAccumulator>>> {
    let beta = rep.beta();
    let target = bridge_target(theta, t, beta, spec.drift);
    let floor = det_floor(rep, t);
    let pool: Vec<Result<Option<CovarianceAccumulator>>> = (0..spec.n_paths)
        .into_par_iter()
        .map_init(
            || vec![0.0; spec.n_steps + 1],
            |buf, i| {
                let mut rng = sample_rng(spec.seed, point_index, i as u64);
                fill_bridge(t, target, DIFFUSION_RATE, &mut rng, buf);
                let acc = accumulate(buf, t, beta, spec.quadrature, |u| covariance_vector(rep, u))?;
                Ok((acc.det >= floor).then_some(acc))
            },
        )
        .collect();
    pool.into_iter().collect()
}

fn estimate_from_pool(
    pool: &[Option<CovarianceAccumulator>],
    rep: &AffineRep,
    t: f64,
    point: GroupPoint,
    spec: &McSpec,
) -> Result<KernelEstimate> {
    let rejects = pool.iter().filter(|p| p.is_none()).count();
    if rejects * 100 > pool.len() {
        return Err(Error::TooManyRejections {
            rejected: rejects,
            total: pool.len(),
        });
    }
    let v = point.v();
    let values: Vec<f64> = pool.iter().flatten().map(|acc| acc.gaussian_density(&v)).collect();
    let (mean, se) = mean_and_std_error(&values);
    let pre = gaussian_prefactor(point.theta, t, rep.beta(), spec.drift);
    Ok(KernelEstimate {
        point,
        t,
        value: pre * mean,
        std_error: pre * se,
        n_paths: spec.n_paths,
        n_steps: spec.n_steps,
        seed: spec.seed,
        drift_convention: spec.drift,
        rejects,
    })
}

/// Heat kernel at `point` after time `t`, with respect to `dtheta dx dy`.
///
/// The estimate is a deterministic function of `(rep, t, point, spec)`; in
/// particular the values at `(theta, x, y)` and `(theta, -x, -y)` coincide
/// bit for bit.
pub fn kernel_point_estimate(rep: &AffineRep, t: f64, point: &GroupPoint, spec: &McSpec) -> Result<KernelEstimate> {
    check_inputs(t, spec)?;
    let pool = covariance_pool(rep, t, point.theta, spec, 0)?;
    estimate_from_pool(&pool, rep, t, *point, spec)
}

/// Estimates at several points; point `i` uses the streams of index `i`.
pub fn kernel_estimates(rep: &AffineRep, t: f64, points: &[GroupPoint], spec: &McSpec) -> Result<Vec<KernelEstimate>> {
    check_inputs(t, spec)?;
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pool = covariance_pool(rep, t, p.theta, spec, i as u64)?;
            estimate_from_pool(&pool, rep, t, *p, spec)
        })
        .collect()
}

/// Estimates on a whole `theta`-slice from one shared pool of bridges
/// (streams of index `slice_index`). Errors across the slice are correlated.
pub fn kernel_slice_estimates(
    rep: &AffineRep,
    t: f64,
    theta: f64,
    xy: &[(f64, f64)],
    spec: &McSpec,
    slice_index: u64,
) -> Result<Vec<KernelEstimate>> {
    check_inputs(t, spec)?;
    let pool = covariance_pool(rep, t, theta, spec, slice_index)?;
    xy.par_iter()
        .map(|&(x, y)| estimate_from_pool(&pool, rep, t, GroupPoint::new(theta, x, y), spec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Params;
    use crate::tolerance::ToleranceProfile;

    fn spec(n_paths: usize) -> McSpec {
        McSpec {
            n_paths,
            n_steps: 64,
            seed: 42,
            ..McSpec::default()
        }
    }

    #[test]
    fn estimator_is_even_in_xy_bit_for_bit() {
        let rep = AffineRep::from_params(Params::new(-2.0, 1.0), &ToleranceProfile::default()).unwrap();
        let a = kernel_point_estimate(&rep, 0.5, &GroupPoint::new(0.2, 0.3, -0.1), &spec(500)).unwrap();
        let b = kernel_point_estimate(&rep, 0.5, &GroupPoint::new(0.2, -0.3, 0.1), &spec(500)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn repeat_runs_are_identical() {
        let rep = AffineRep::from_params(Params::new(-1.0, 0.0), &ToleranceProfile::default()).unwrap();
        let p = GroupPoint::new(0.3, 0.2, 0.1);
        let a = kernel_point_estimate(&rep, 0.5, &p, &spec(300)).unwrap();
        let b = kernel_point_estimate(&rep, 0.5, &p, &spec(300)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conventions_coincide_without_drift() {
        let rep = AffineRep::from_params(Params::new(0.0, 0.0), &ToleranceProfile::default()).unwrap();
        let p = GroupPoint::new(0.5, 0.2, 0.1);
        let mut s = spec(200);
        let a = kernel_point_estimate(&rep, 1.0, &p, &s).unwrap();
        s.drift = DriftConvention::Undrifted;
        let b = kernel_point_estimate(&rep, 1.0, &p, &s).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn prefactor_is_a_normal_density() {
        let p = gaussian_prefactor(-0.5, 1.0, 0.5, DriftConvention::Drifted);
        assert!((p - 1.0 / (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }
}
