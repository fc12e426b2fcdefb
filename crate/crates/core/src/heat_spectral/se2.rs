use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::mathieu::{class_functions_from, MathieuFunction, MathieuKind, ParityClass};
use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;
use crate::representation::{AffineRep, GroupPoint};
use crate::tolerance::ToleranceProfile;

const GL_ORDER: usize = 16;
const CUTOFF_TOLERANCE: f64 = 1e-10;

/// Truncation and quadrature settings for the `SE(2)` spectral kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralKernelConfig {
    /// Number of Mathieu modes: `ce_k` and `se_k` for `k < modes`.
    pub modes: usize,
    /// Smallest Fourier truncation per mode; raised automatically with `q`.
    pub truncation: usize,
    /// Radial cutoff; `None` starts at `8 / sqrt(t)`.
    pub rho_max: Option<f64>,
    /// Gauss-Legendre nodes in `rho` (a multiple of 32).
    pub n_rho: usize,
    /// Trapezoid nodes in `phi` (even).
    pub n_phi: usize,
    /// Origin of the `phi` grid.
    pub phi_offset: f64,
    /// How often the cutoff may be doubled while the integrand at `rho_max`
    /// exceeds `1e-10`.
    pub max_rho_doublings: usize,
}

impl Default for SpectralKernelConfig {
    fn default() -> Self {
        Self {
            modes: 16,
            truncation: 32,
            rho_max: None,
            n_rho: 256,
            n_phi: 256,
            phi_offset: 0.0,
            max_rho_doublings: 4,
        }
    }
}

impl SpectralKernelConfig {
    fn validate(&self) -> Result<()> {
        if self.modes == 0 || self.truncation < self.modes {
            return Err(Error::InvalidArgument("need 0 < modes <= truncation".into()));
        }
        if self.n_rho < 32 || self.n_rho % 32 != 0 || self.n_phi < 4 || self.n_phi % 2 != 0 {
            return Err(Error::InvalidArgument("n_rho must be a multiple of 32 and n_phi even".into()));
        }
        if let Some(r) = self.rho_max {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidArgument("rho_max must be positive".into()));
            }
        }
        Ok(())
    }
}

/// `p^_t(theta, rho, phi)` and the magnitude of its last retained mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatKernelValue {
    pub value: f64,
    pub tail: f64,
}

/// The Mathieu modes needed at one radius, with their time factors.
struct Modes {
    ce: Vec<(f64, MathieuFunction)>,
    se: Vec<(f64, MathieuFunction)>,
    max_harmonic: usize,
}

impl Modes {
    fn new(rho: f64, t: f64, config: &SpectralKernelConfig) -> Result<Self> {
        let k_max = config.modes;
        let q = rho * rho / 4.0;
        let decay = |a: f64| (-(rho * rho / 2.0 + a) * t).exp();
        let mut ce = Vec::with_capacity(k_max);
        let mut se = Vec::with_capacity(k_max);
        let count = |first: usize| if k_max > first { (k_max - first).div_ceil(2) } else { 0 };
        for (class, n) in [
            (ParityClass::CeEven, count(0)),
            (ParityClass::CeOdd, count(1)),
            (ParityClass::SeOdd, count(1)),
            (ParityClass::SeEven, count(2)),
        ] {
            if n == 0 {
                continue;
            }
            let out = match class.kind() {
                MathieuKind::Ce => &mut ce,
                MathieuKind::Se => &mut se,
            };
            for f in class_functions_from(class, q, n, config.truncation)? {
                out.push((decay(f.char_value), f));
            }
        }
        ce.sort_by_key(|m| m.1.order);
        se.sort_by_key(|m| m.1.order);
        let max_harmonic = ce
            .iter()
            .chain(se.iter())
            .map(|(_, f)| f.harmonic(f.fourier_coeffs.len() - 1))
            .max()
            .unwrap_or(0);
        Ok(Self { ce, se, max_harmonic })
    }

    /// Sum of the series given `cos(n a), sin(n a)` tables for `a = phi` and
    /// `a = theta - phi`. Returns the value and the last-mode term.
    fn evaluate(&self, phi: &Harmonics, psi: &Harmonics) -> (f64, f64) {
        let mut total = 0.0;
        let mut last_ce = 0.0;
        let mut last_se = 0.0;
        for (w, f) in &self.ce {
            let term = w * phi.ce(f) * psi.ce(f);
            total += term;
            last_ce = term;
        }
        for (w, f) in &self.se {
            let term = w * phi.se(f) * psi.se(f);
            total -= term;
            last_se = term;
        }
        (total / PI, last_ce.abs().max(last_se.abs()) / PI)
    }
}

/// `cos(n a)` and `sin(n a)` for `n = 0..=n_max`.
struct Harmonics {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Harmonics {
    fn new(a: f64, n_max: usize) -> Self {
        let mut cos = Vec::with_capacity(n_max + 1);
        let mut sin = Vec::with_capacity(n_max + 1);
        let (s1, c1) = a.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        for n in 0..=n_max {
            if n % 16 == 0 {
                (s, c) = (n as f64 * a).sin_cos();
            }
            cos.push(c);
            sin.push(s);
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
        }
        Self { cos, sin }
    }

    fn ce(&self, f: &MathieuFunction) -> f64 {
        f.fourier_coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.cos[f.harmonic(j)])
            .sum()
    }

    fn se(&self, f: &MathieuFunction) -> f64 {
        f.fourier_coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.sin[f.harmonic(j)])
            .sum()
    }
}

/// The canonical `SE(2)` parameters are `(alpha, beta) = (-1, 0)`.
fn require_se2(rep: &AffineRep) -> Result<()> {
    let tol = ToleranceProfile::default().parameter_match;
    let p = rep.params;
    if (p.alpha + 1.0).abs() > tol || p.beta.abs() > tol {
        return Err(Error::RegimeMismatch(format!(
            "the Mathieu series needs (alpha, beta) = (-1, 0), got ({}, {})",
            p.alpha, p.beta
        )));
    }
    Ok(())
}

fn check_time(t: f64, allow_zero: bool) -> Result<()> {
    if (t > 0.0 || (allow_zero && t == 0.0)) && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("invalid time t = {t}")))
    }
}

/// Fourier transform in `(x, y)` of the `SE(2)` heat kernel:
///
/// ```text
/// p^_t(theta, rho, phi) = (1/pi) sum_k [ e^{alpha_k t} ce_k(phi) ce_k(theta - phi)
///                                      - e^{beta_k t} se_k(phi) se_k(theta - phi) ]
/// ```
///
/// with `q = rho^2/4`, `alpha_k = -rho^2/2 - a_k(q)`, `beta_k = -rho^2/2 - b_k(q)`,
/// summed over `k < config.modes`.
pub fn se2_hat_kernel(
    rep: &AffineRep,
    t: f64,
    theta: f64,
    rho: f64,
    phi: f64,
    config: &SpectralKernelConfig,
) -> Result<HatKernelValue> {
    require_se2(rep)?;
    check_time(t, true)?;
    config.validate()?;
    let modes = Modes::new(rho, t, config)?;
    let (value, tail) = modes.evaluate(
        &Harmonics::new(phi, modes.max_harmonic),
        &Harmonics::new(theta - phi, modes.max_harmonic),
    );
    Ok(HatKernelValue { value, tail })
}

/// Spectral value of the `SE(2)` heat kernel at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub point: GroupPoint,
    pub t: f64,
    pub value: f64,
    /// Imaginary part of the inversion integral; zero for the exact kernel.
    pub imag: f64,
    /// Difference between full and half quadrature resolution.
    pub error_estimate: f64,
    pub rho_max: f64,
    /// `max_phi rho |p^_t| / (4 pi^2)` at the cutoff.
    pub integrand_at_cutoff: f64,
    /// Set when the integrand at the final cutoff still exceeds `1e-10`.
    pub truncation_warning: bool,
    pub config: SpectralKernelConfig,
}

fn cutoff_integrand(point: &GroupPoint, t: f64, rho: f64, config: &SpectralKernelConfig) -> Result<f64> {
    let modes = Modes::new(rho, t, config)?;
    let psi_table = |phi: f64| Harmonics::new(point.theta - phi, modes.max_harmonic);
    let mut m: f64 = 0.0;
    for j in 0..config.n_phi {
        let phi = config.phi_offset + 2.0 * PI * j as f64 / config.n_phi as f64;
        let (v, _) = modes.evaluate(&Harmonics::new(phi, modes.max_harmonic), &psi_table(phi));
        m = m.max(v.abs());
    }
    Ok(rho * m / (4.0 * PI * PI))
}

/// `(1/4 pi^2) int int e^{i rho (x cos phi + y sin phi)} p^_t rho drho dphi`
/// at one resolution; returns `(real, imaginary)`.
fn inversion(point: &GroupPoint, t: f64, rho_max: f64, n_rho: usize, n_phi: usize, config: &SpectralKernelConfig) -> Result<(f64, f64)> {
    let (nodes, weights) = composite_gauss_legendre(0.0, rho_max, n_rho / GL_ORDER, GL_ORDER);
    let dphi = 2.0 * PI / n_phi as f64;
    let phis: Vec<f64> = (0..n_phi).map(|j| config.phi_offset + dphi * j as f64).collect();
    let (mut re, mut im) = (0.0, 0.0);
    for (&rho, &w) in nodes.iter().zip(&weights) {
        let modes = Modes::new(rho, t, config)?;
        let (mut ring_re, mut ring_im) = (0.0, 0.0);
        for &phi in &phis {
            let (hat, _) = modes.evaluate(
                &Harmonics::new(phi, modes.max_harmonic),
                &Harmonics::new(point.theta - phi, modes.max_harmonic),
            );
            let (s, c) = (rho * (point.x * phi.cos() + point.y * phi.sin())).sin_cos();
            ring_re += hat * c;
            ring_im += hat * s;
        }
        re += w * rho * ring_re * dphi;
        im += w * rho * ring_im * dphi;
    }
    let norm = 1.0 / (4.0 * PI * PI);
    Ok((re * norm, im * norm))
}

/// The `SE(2)` heat kernel at `point` after time `t` from the Mathieu series,
/// inverted by Gauss-Legendre quadrature in `rho` and the trapezoid rule in
/// `phi`.
pub fn se2_kernel(rep: &AffineRep, t: f64, point: &GroupPoint, config: &SpectralKernelConfig) -> Result<SpectralEstimate> {
    require_se2(rep)?;
    check_time(t, false)?;
    config.validate()?;
    let mut rho_max = config.rho_max.unwrap_or(8.0 / t.sqrt());
    let mut at_cutoff = cutoff_integrand(point, t, rho_max, config)?;
    let mut doublings = 0;
    while at_cutoff > CUTOFF_TOLERANCE && doublings < config.max_rho_doublings {
        rho_max *= 2.0;
        doublings += 1;
        at_cutoff = cutoff_integrand(point, t, rho_max, config)?;
    }
    let (value, imag) = inversion(point, t, rho_max, config.n_rho, config.n_phi, config)?;
    let (half, _) = inversion(point, t, rho_max, config.n_rho / 2, config.n_phi / 2, config)?;
    Ok(SpectralEstimate {
        point: *point,
        t,
        value,
        imag,
        error_estimate: (value - half).abs(),
        rho_max,
        integrand_at_cutoff: at_cutoff,
        truncation_warning: at_cutoff > CUTOFF_TOLERANCE,
        config: *config,
    })
}
