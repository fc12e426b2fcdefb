use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calculus::{random_point, test_suite, CdForm, FieldCalculus, TestFunction};
use crate::algebra::Params;
use crate::error::{Error, Result};
use crate::representation::{AffineRep, GroupPoint};
use crate::rng::{sample_rng, DEFAULT_SEED};

/// Stream used to draw sweep points.
const SWEEP_STREAM: u64 = 0xCD;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdSettings {
    pub n_points: usize,
    /// Points are uniform in `[-half_width, half_width]^3`.
    pub half_width: f64,
    pub nus: Vec<f64>,
    pub seed: u64,
    pub term_cap: usize,
    #[serde(default)]
    pub form: CdForm,
}

impl Default for CdSettings {
    fn default() -> Self {
        Self {
            n_points: 1000,
            half_width: 1.5,
            nus: vec![0.1, 1.0, 10.0],
            seed: DEFAULT_SEED,
            term_cap: super::expr::DEFAULT_TERM_CAP,
            form: CdForm::Stated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdResidual {
    pub function: usize,
    pub point_index: usize,
    pub point: GroupPoint,
    pub nu: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub name: String,
    pub min_residual: f64,
    pub terms_gamma2: usize,
}

/// Curvature-dimension residuals for one parameter pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdReport {
    pub params: Params,
    pub settings: CdSettings,
    pub functions: Vec<FunctionSummary>,
    pub residuals: Vec<CdResidual>,
    pub min_residual: f64,
    pub worst: CdResidual,
}

impl CdReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.min_residual >= -tolerance
    }
}

/// The sweep points for `settings`.
pub fn sweep_points(settings: &CdSettings) -> Vec<GroupPoint> {
    (0..settings.n_points)
        .map(|i| random_point(&mut sample_rng(settings.seed, SWEEP_STREAM, i as u64), settings.half_width))
        .collect()
}

/// Evaluates the residual for every suite function, sweep point and `nu`.
pub fn cd_sweep(rep: &AffineRep, settings: &CdSettings) -> Result<CdReport> {
    cd_sweep_functions(rep, &test_suite(), settings)
}

pub fn cd_sweep_functions(rep: &AffineRep, functions: &[TestFunction], settings: &CdSettings) -> Result<CdReport> {
    if settings.nus.is_empty() || settings.nus.iter().any(|&nu| !(nu > 0.0 && nu.is_finite())) {
        return Err(Error::InvalidArgument("every nu must be positive and finite".into()));
    }
    if settings.n_points == 0 || functions.is_empty() {
        return Err(Error::InvalidArgument("need at least one point and one function".into()));
    }
    let calc = FieldCalculus::with_cap(rep, settings.term_cap);
    let points = sweep_points(settings);
    let per_function: Vec<(FunctionSummary, Vec<CdResidual>)> = functions
        .par_iter()
        .enumerate()
        .map(|(fi, tf)| {
            let forms = calc.forms(&tf.expr)?;
            let mut out = Vec::with_capacity(points.len() * settings.nus.len());
            for (pi, p) in points.iter().enumerate() {
                let c = forms.eval(p);
                for &nu in &settings.nus {
                    out.push(CdResidual {
                        function: fi,
                        point_index: pi,
                        point: *p,
                        nu,
                        residual: c.residual(settings.form, nu, &rep.params),
                    });
                }
            }
            let min = out.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
            let summary = FunctionSummary {
                name: tf.name.to_string(),
                min_residual: min,
                terms_gamma2: forms.gamma2.len(),
            };
            Ok((summary, out))
        })
        .collect::<Result<_>>()?;
    let mut functions_out = Vec::new();
    let mut residuals = Vec::new();
    for (s, r) in per_function {
        functions_out.push(s);
        residuals.extend(r);
    }
    if residuals.iter().any(|r| !r.residual.is_finite()) {
        return Err(crate::error::non_finite("cd_verify", "residual overflowed"));
    }
    let worst = *residuals
        .iter()
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .expect("non-empty sweep");
    Ok(CdReport {
        params: rep.params,
        settings: settings.clone(),
        functions: functions_out,
        residuals,
        min_residual: worst.residual,
        worst,
    })
}
