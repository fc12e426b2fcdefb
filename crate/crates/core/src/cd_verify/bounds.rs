use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::smooth::{gamma_pair, SmoothFunction};
use crate::algebra::Params;
use crate::error::{non_finite, Error, Result};
use crate::heat_mc::{sample_endpoints, SdeSpec};
use crate::linalg::mean_and_std_error;
use crate::representation::{AffineRep, Field, GroupPoint};

/// `expm1(x) / x`, equal to 1 at `x = 0`.
fn expm1_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

/// End of the admissible horizon `(1 / 2 kappa) ln((kappa + |alpha|) / |alpha|)`,
/// equal to `1 / (2 |alpha|)` at `kappa = 0`.
pub fn window_max(kappa: f64, abs_alpha: f64) -> f64 {
    let r = kappa / abs_alpha;
    if r < 1e-12 {
        (1.0 - 0.5 * r) / (2.0 * abs_alpha)
    } else {
        r.ln_1p() / (2.0 * kappa)
    }
}

/// `kappa e^(2 kappa t) / (kappa + |alpha| (1 - e^(2 kappa t)))`, written as
/// `(1 + E) / (1 - 2 |alpha| t expm1(2 kappa t) / (2 kappa t))` with `E = expm1(2 kappa t)`
/// so that `kappa = 0` gives `1 / (1 - 2 |alpha| t)`.
pub fn gradient_coefficient(kappa: f64, abs_alpha: f64, t: f64) -> f64 {
    let x = 2.0 * kappa * t;
    (1.0 + x.exp_m1()) / (1.0 - abs_alpha * 2.0 * t * expm1_ratio(x))
}

/// Which inequality a [`BoundReport`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    GradientBound,
    ReversePoincare,
}

/// Monte Carlo settings for the semigroup inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub sde: SdeSpec,
    /// Step of the central differences along the group flows.
    pub fd_step: f64,
    pub base: GroupPoint,
    /// Number of samples of `a(t)` on `[0, T]` in the report.
    pub curve_samples: usize,
}

impl Default for BoundSpec {
    fn default() -> Self {
        Self {
            sde: SdeSpec {
                n_paths: 100_000,
                n_steps: 128,
                ..SdeSpec::default()
            },
            fd_step: 1e-4,
            base: GroupPoint::IDENTITY,
            curve_samples: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub params: Params,
    #[serde(rename = "T")]
    pub t: f64,
    pub kappa_cd: f64,
    /// Present for the gradient bound only.
    pub t_window_max: Option<f64>,
    /// Factor multiplying `P_T Gamma(f)` on the right-hand side.
    pub coefficient: f64,
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub rhs: f64,
    pub rhs_std_error: f64,
    /// Standard error of `lhs - rhs`, correlations included.
    pub diff_std_error: f64,
    pub pass: bool,
    /// Pairs `(t, a(t))` of the comparison function with `a(0) = 1`.
    pub a_curve: Vec<[f64; 2]>,
    pub spec: BoundSpec,
}

/// Per-path quantities shared by both inequalities.
struct PathSamples {
    /// Central differences of `f(base exp(hF) Z)` for `F = X, Y, R`.
    diffs: [Vec<f64>; 3],
    value: Vec<f64>,
    gamma: Vec<f64>,
    gamma_r: Vec<f64>,
}

fn sample_paths(rep: &AffineRep, f: &dyn SmoothFunction, t: f64, spec: &BoundSpec) -> Result<PathSamples> {
    let ends = sample_endpoints(rep, t, &spec.sde)?;
    let h = spec.fd_step;
    let shifted: Vec<[GroupPoint; 2]> = [Field::X, Field::Y, Field::R]
        .iter()
        .map(|&fld| [rep.flow(&spec.base, fld, h), rep.flow(&spec.base, fld, -h)])
        .collect();
    let rows: Vec<[f64; 6]> = ends
        .par_iter()
        .map(|z| {
            let mut row = [0.0; 6];
            for (k, [plus, minus]) in shifted.iter().enumerate() {
                row[k] = (f.value(&rep.group_mul(plus, z)) - f.value(&rep.group_mul(minus, z))) / (2.0 * h);
            }
            let g = rep.group_mul(&spec.base, z);
            row[3] = f.value(&g);
            let (gm, gr) = gamma_pair(rep, f, &g);
            row[4] = gm;
            row[5] = gr;
            row
        })
        .collect();
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(non_finite("cd_verify", "test function returned a non-finite value"));
    }
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    Ok(PathSamples {
        diffs: [col(0), col(1), col(2)],
        value: col(3),
        gamma: col(4),
        gamma_r: col(5),
    })
}

fn abs_alpha(params: &Params) -> Result<f64> {
    if params.alpha == 0.0 {
        return Err(Error::InvalidArgument("the semigroup bounds need alpha != 0".into()));
    }
    Ok(params.alpha.abs())
}

fn mean(v: &[f64]) -> f64 {
    mean_and_std_error(v).0
}

fn std_error(v: &[f64]) -> f64 {
    mean_and_std_error(v).1
}

/// `Gamma(P_T f) + Gamma^R(P_T f) / |alpha|` estimated from the differences:
/// returns the value and the per-path linearisation.
fn semigroup_gradient_term(s: &PathSamples, abs_alpha: f64) -> (f64, Vec<f64>) {
    let d: Vec<f64> = s.diffs.iter().map(|v| mean(v)).collect();
    let value = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] / abs_alpha;
    let lin = (0..s.value.len())
        .map(|i| 2.0 * (d[0] * s.diffs[0][i] + d[1] * s.diffs[1][i] + d[2] * s.diffs[2][i] / abs_alpha))
        .collect();
    (value, lin)
}

fn curve(t: f64, n: usize, a: impl Fn(f64) -> f64) -> Vec<[f64; 2]> {
    if n < 2 {
        return vec![[t, a(t)]];
    }
    (0..n)
        .map(|j| {
            let s = t * j as f64 / (n - 1) as f64;
            [s, a(s)]
        })
        .collect()
}

/// Checks `Gamma(P_T f) + Gamma^R(P_T f) / |alpha| <= a(T) P_T Gamma(f) + P_T Gamma^R(f) / |alpha|`
/// at `spec.base`, with `a` the comparison function normalised by `a(0) = 1`.
pub fn gradient_bound_check(rep: &AffineRep, f: &dyn SmoothFunction, t: f64, spec: &BoundSpec) -> Result<BoundReport> {
    let params = rep.params;
    let aa = abs_alpha(&params)?;
    let kappa = params.kappa_cd();
    let t_max = window_max(kappa, aa);
    if !(t >= 0.0 && t < t_max) {
        return Err(Error::WindowExceeded { t, t_max });
    }
    let coefficient = gradient_coefficient(kappa, aa, t);
    let a_curve = curve(t, spec.curve_samples, |s| gradient_coefficient(kappa, aa, s));
    let report = |lhs, lhs_se, rhs, rhs_se, diff_se: f64| BoundReport {
        kind: BoundKind::GradientBound,
        params,
        t,
        kappa_cd: kappa,
        t_window_max: Some(t_max),
        coefficient,
        lhs,
        lhs_std_error: lhs_se,
        rhs,
        rhs_std_error: rhs_se,
        diff_std_error: diff_se,
        pass: lhs <= rhs + 3.0 * diff_se,
        a_curve: a_curve.clone(),
        spec: *spec,
    };
    if t == 0.0 {
        let (g, gr) = gamma_pair(rep, f, &spec.base);
        let side = g + gr / aa;
        return Ok(report(side, 0.0, coefficient * g + gr / aa, 0.0, 0.0));
    }
    let s = sample_paths(rep, f, t, spec)?;
    let (lhs, lhs_lin) = semigroup_gradient_term(&s, aa);
    let rhs_samples: Vec<f64> = s.gamma.iter().zip(&s.gamma_r).map(|(g, r)| coefficient * g + r / aa).collect();
    let diff: Vec<f64> = lhs_lin.iter().zip(&rhs_samples).map(|(l, r)| l - r).collect();
    Ok(report(lhs, std_error(&lhs_lin), mean(&rhs_samples), std_error(&rhs_samples), std_error(&diff)))
}

/// Checks
/// `Gamma(P_T f) + Gamma^R(P_T f)/|alpha| - e^(cT) P_T Gamma(f) - P_T Gamma^R(f)/|alpha|
///  <= |alpha| e^(cT) (e^(cT) - 1) (P_T f^2 - (P_T f)^2)` with `c = 2 (kappa + |alpha|)`.
pub fn reverse_poincare_check(rep: &AffineRep, f: &dyn SmoothFunction, t: f64, spec: &BoundSpec) -> Result<BoundReport> {
    let params = rep.params;
    let aa = abs_alpha(&params)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {t}")));
    }
    let kappa = params.kappa_cd();
    let c = 2.0 * (kappa + aa);
    let growth = (c * t).exp();
    let k = aa * growth * (c * t).exp_m1();
    let s = sample_paths(rep, f, t, spec)?;
    let (grad, grad_lin) = semigroup_gradient_term(&s, aa);
    let m = mean(&s.value);
    let n = s.value.len();
    let pt_gamma: Vec<f64> = (0..n).map(|i| growth * s.gamma[i] + s.gamma_r[i] / aa).collect();
    let lhs = grad - mean(&pt_gamma);
    let lhs_lin: Vec<f64> = (0..n).map(|i| grad_lin[i] - pt_gamma[i]).collect();
    let var_lin: Vec<f64> = s.value.iter().map(|v| k * (v * v - 2.0 * m * v)).collect();
    let second = mean(&s.value.iter().map(|v| v * v).collect::<Vec<_>>());
    let rhs = k * (second - m * m);
    let diff: Vec<f64> = (0..n).map(|i| lhs_lin[i] - var_lin[i]).collect();
    let diff_se = std_error(&diff);
    Ok(BoundReport {
        kind: BoundKind::ReversePoincare,
        params,
        t,
        kappa_cd: kappa,
        t_window_max: None,
        coefficient: growth,
        lhs,
        lhs_std_error: std_error(&lhs_lin),
        rhs,
        rhs_std_error: std_error(&var_lin),
        diff_std_error: diff_se,
        pass: lhs <= rhs + 3.0 * diff_se,
        a_curve: curve(t, spec.curve_samples, |s| (c * s).exp()),
        spec: *spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_limits() {
        assert_eq!(gradient_coefficient(2.0, 1.0, 0.0), 1.0);
        let t = 0.2;
        let exact = 1.0 / (1.0 - 2.0 * t);
        assert!((gradient_coefficient(0.0, 1.0, t) - exact).abs() < 1e-15);
        assert!((gradient_coefficient(1e-6, 1.0, t) - exact).abs() < 1e-5);
        let (k, a) = (1.5, 0.7);
        let direct = k * (2.0 * k * t).exp() / (k + a * (1.0 - (2.0 * k * t).exp()));
        assert!((gradient_coefficient(k, a, t) - direct).abs() < 1e-13 * direct);
    }

    #[test]
    fn window_is_continuous_at_zero_curvature() {
        assert_eq!(window_max(0.0, 2.0), 0.25);
        assert!((window_max(1e-6, 2.0) - 0.25).abs() < 1e-6);
        assert!((window_max(2.0, 1.0) - 3f64.ln() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_is_increasing_on_the_window() {
        for (k, a) in [(0.0, 1.0), (2.0, 1.0), (1.0, 2.0), (5.0, 0.1)] {
            let tm = window_max(k, a);
            let mut prev = 1.0;
            for j in 0..200 {
                let c = gradient_coefficient(k, a, tm * j as f64 / 200.0);
                assert!(c >= prev && c >= 1.0);
                prev = c;
            }
        }
    }
}
