//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion misses its pinned outcome.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rayon::ThreadPoolBuilder;
use solvkernel::algebra::{canonicalize, Params};
use solvkernel::cd_verify::{
    carre, cd_sweep, gradient_bound_check, reverse_poincare_check, test_suite, window_max, BoundSpec, Bump, CdForm,
    CdReport, CdSettings, FieldCalculus,
};
use solvkernel::heat_mc::{kernel_estimates, kernel_mass_check, sample_endpoints, DriftConvention, GridSpec, McSpec, SdeSpec};
use solvkernel::heat_spectral::{mathieu_char, oracle_kernel, se2_kernel, MathieuFunction, MathieuKind, OracleConfig, SpectralKernelConfig};
use solvkernel::presets::Preset;
use solvkernel::representation::{AffineRep, Field, FiniteDifference, GroupPoint};
use solvkernel::rng::{sample_rng, DEFAULT_SEED};
use solvkernel::tolerance::ToleranceProfile;

const CLASSIFICATION_TOL: f64 = 1e-9;
const COMMUTATOR_MATRIX_TOL: f64 = 1e-12;
const COMMUTATOR_FD_TOL: f64 = 1e-6;
const MATHIEU_CHAR_TOL: f64 = 1e-10;
const MATHIEU_ORTHO_TOL: f64 = 1e-8;
const MATHIEU_ODE_TOL: f64 = 1e-8;
const ERROR_BARS: f64 = 3.0;
const HEISENBERG_REL_TOL: f64 = 0.05;
const MASS_WINDOW: (f64, f64) = (0.97, 1.01);
const CD_TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

fn rep(a: f64, b: f64) -> AffineRep {
    AffineRep::from_params(Params::new(a, b), &tol()).unwrap()
}

fn within_bars(a: f64, ea: f64, b: f64, eb: f64) -> bool {
    (a - b).abs() <= ERROR_BARS * ea.hypot(eb)
}

fn presets() -> [Preset; 5] {
    [
        Preset::Heisenberg,
        Preset::Se2,
        Preset::SolvMinus,
        Preset::Rank1Beta(1.0),
        Preset::DeltaZero(1.0),
    ]
}

fn classification_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (s, preset) in presets().into_iter().enumerate() {
        let target = preset.params();
        let base = preset.triple();
        for i in 0..100u64 {
            let mut rng = sample_rng(DEFAULT_SEED, 0xAC1 + s as u64, i);
            let p = loop {
                let p: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)));
                let det = p[0][0] * (p[1][1] * p[2][2] - p[1][2] * p[2][1]) - p[0][1] * (p[1][0] * p[2][2] - p[1][2] * p[2][0])
                    + p[0][2] * (p[1][0] * p[2][1] - p[1][1] * p[2][0]);
                if det.abs() > 0.1 {
                    break p;
                }
            };
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let flip = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
            let (c, sn) = (phi.cos(), phi.sin());
            let m = [[c, -flip * sn], [sn, flip * c]];
            let triple = base.change_basis(&p).unwrap().change_horizontal_frame(&m);
            match canonicalize(&triple, &tol()) {
                Ok(cl) => {
                    let scale = target.alpha.abs().max(target.beta).max(1.0);
                    let err = (cl.form.alpha - target.alpha).abs().max((cl.form.beta - target.beta).abs()) / scale;
                    worst = worst.max(err);
                }
                Err(e) => failures.push(format!("{preset} trial {i}: {e}")),
            }
        }
    }
    Outcome::new(
        failures.is_empty() && worst <= CLASSIFICATION_TOL,
        format!("500 random frames, worst parameter error {worst:.2e}{}", failures.first().map(|f| format!(", {f}")).unwrap_or_default()),
    )
}

fn random_regime_params(i: u64) -> [Params; 5] {
    let mut rng = sample_rng(DEFAULT_SEED, 0xAC2, i);
    let beta: f64 = rng.random_range(0.2..2.0);
    let alpha_pos: f64 = rng.random_range(0.2..2.0);
    let alpha_neg: f64 = -rng.random_range(0.2..2.0);
    let delta_neg_beta = beta.min(0.9 * 2.0 * (-alpha_neg).sqrt());
    [
        Params::new(0.0, 0.0),
        Params::new(0.0, beta),
        Params::new(alpha_pos, beta),
        Params::new(alpha_neg, delta_neg_beta),
        Params::new(-beta * beta / 4.0, beta),
    ]
}

fn commutation_relations() -> Outcome {
    let fd = FiniteDifference { step: 1e-3, order: 4 };
    let funcs: [&dyn Fn(&GroupPoint) -> f64; 3] = [
        &|p| p.theta.sin() * p.x + p.y * p.y * p.theta.cos(),
        &|p| (0.3 * p.x - 0.2 * p.y).exp() * (1.0 + p.theta * p.theta),
        &|p| p.x * p.y * p.theta + (p.x - p.theta).cos(),
    ];
    let mut matrix_worst: f64 = 0.0;
    let mut fd_worst: f64 = 0.0;
    let mut tags = std::collections::BTreeSet::new();
    for i in 0..4u64 {
        for params in random_regime_params(i) {
            let r = rep(params.alpha, params.beta);
            tags.insert(r.regime.tag());
            matrix_worst = matrix_worst.max(r.commutator_residual());
            let mut rng = sample_rng(DEFAULT_SEED, 0xAC2F, i);
            for _ in 0..5 {
                let p = GroupPoint::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                for f in funcs {
                    let w = |word: &[Field]| r.apply_operator(word, f, &p, &fd).unwrap();
                    let y = w(&[Field::Y]);
                    let res = [
                        w(&[Field::X, Field::Y]) - w(&[Field::Y, Field::X]) - params.beta * y - w(&[Field::R]),
                        w(&[Field::X, Field::R]) - w(&[Field::R, Field::X]) - params.alpha * y,
                        w(&[Field::Y, Field::R]) - w(&[Field::R, Field::Y]),
                    ];
                    fd_worst = res.iter().fold(fd_worst, |m, v| m.max(v.abs()));
                }
            }
        }
    }
    Outcome::new(
        tags.len() == 5 && matrix_worst <= COMMUTATOR_MATRIX_TOL && fd_worst <= COMMUTATOR_FD_TOL,
        format!("{} regimes, matrix residual {matrix_worst:.1e}, nested-derivative residual {fd_worst:.1e}", tags.len()),
    )
}

fn mathieu_correctness() -> Outcome {
    let mut char_err: f64 = 0.0;
    for k in 0..=8usize {
        let k2 = (k * k) as f64;
        char_err = char_err.max((mathieu_char(0.0, k, MathieuKind::Ce).unwrap() - k2).abs());
        if k > 0 {
            char_err = char_err.max((mathieu_char(0.0, k, MathieuKind::Se).unwrap() - k2).abs());
        }
    }
    const M: usize = 32;
    const N: usize = 512;
    let mut ortho_err: f64 = 0.0;
    let mut ode_err: f64 = 0.0;
    for q in [0.0, 1.0, 5.0, 25.0] {
        let mut fns = Vec::new();
        for k in 0..=8 {
            fns.push(MathieuFunction::with_truncation(MathieuKind::Ce, k, q, M).unwrap());
            if k > 0 {
                fns.push(MathieuFunction::with_truncation(MathieuKind::Se, k, q, M).unwrap());
            }
        }
        let samples: Vec<Vec<f64>> = fns
            .iter()
            .map(|f| (0..N).map(|j| f.eval(2.0 * PI * j as f64 / N as f64)).collect())
            .collect();
        for (a, fa) in samples.iter().enumerate() {
            for (b, fb) in samples.iter().enumerate() {
                let integral: f64 = fa.iter().zip(fb).map(|(u, v)| u * v).sum::<f64>() * 2.0 * PI / N as f64;
                let want = if a == b { PI } else { 0.0 };
                ortho_err = ortho_err.max((integral - want).abs());
            }
        }
        for f in &fns {
            ode_err = ode_err.max(f.ode_residual(N) / f.char_value.abs().max(1.0));
        }
    }
    Outcome::new(
        char_err <= MATHIEU_CHAR_TOL && ortho_err <= MATHIEU_ORTHO_TOL && ode_err <= MATHIEU_ODE_TOL,
        format!("characteristic {char_err:.1e}, orthonormality {ortho_err:.1e}, ODE residual {ode_err:.1e} at M={M}"),
    )
}

fn se2_three_way() -> Outcome {
    let r = rep(-1.0, 0.0);
    let t = 0.5;
    let points = [GroupPoint::new(0.3, 0.2, 0.1), GroupPoint::new(0.0, 0.5, 0.0)];
    let spec = McSpec {
        n_paths: 200_000,
        n_steps: 512,
        ..McSpec::default()
    };
    let mc = kernel_estimates(&r, t, &points, &spec).unwrap();
    let oracle = oracle_kernel(&r, t, &points, &OracleConfig::default()).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let s = se2_kernel(&r, t, p, &SpectralKernelConfig::default()).unwrap();
        let (m, o) = (&mc[i], &oracle[i]);
        let ok = within_bars(m.value, m.std_error, s.value, s.error_estimate)
            && within_bars(m.value, m.std_error, o.value, o.error_estimate)
            && within_bars(s.value, s.error_estimate, o.value, o.error_estimate);
        pass &= ok && !s.truncation_warning;
        detail.push(format!(
            "({},{},{}) mc {:.6}+-{:.1e} spectral {:.8}+-{:.1e} oracle {:.8}+-{:.1e}",
            p.theta, p.x, p.y, m.value, m.std_error, s.value, s.error_estimate, o.value, o.error_estimate
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn heisenberg_mc_vs_oracle() -> Outcome {
    let r = rep(0.0, 0.0);
    let t = 1.0;
    let points = [
        GroupPoint::new(0.0, 0.0, 0.0),
        GroupPoint::new(0.5, 0.0, 0.0),
        GroupPoint::new(0.0, 0.5, 0.0),
        GroupPoint::new(0.0, 0.0, 0.5),
        GroupPoint::new(0.5, 0.5, 0.5),
    ];
    let spec = McSpec {
        n_paths: 200_000,
        n_steps: 256,
        ..McSpec::default()
    };
    let mc = kernel_estimates(&r, t, &points, &spec).unwrap();
    let oracle = oracle_kernel(&r, t, &points, &OracleConfig::default()).unwrap();
    let origin_exact = 1.0 / (16.0 * t * t);
    let mut pass = (oracle[0].value - origin_exact).abs() <= ERROR_BARS * oracle[0].error_estimate;
    let mut worst_rel: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    for (m, o) in mc.iter().zip(&oracle) {
        let rel = (m.value - o.value).abs() / o.value;
        let sigma = (m.value - o.value).abs() / m.std_error.hypot(o.error_estimate);
        worst_rel = worst_rel.max(rel);
        worst_sigma = worst_sigma.max(sigma);
        pass &= rel <= HEISENBERG_REL_TOL && sigma <= ERROR_BARS;
    }
    Outcome::new(
        pass,
        format!(
            "5 points, worst relative error {worst_rel:.2e}, worst deviation {worst_sigma:.2} sigma, oracle at origin {:.8} vs 1/16",
            oracle[0].value
        ),
    )
}

fn mass_check() -> Outcome {
    let r = rep(0.0, 0.0);
    let spec = McSpec {
        n_paths: 4000,
        n_steps: 128,
        ..McSpec::default()
    };
    let report = kernel_mass_check(&r, 0.5, &GridSpec::cube(5.0, 41), &spec).unwrap();
    Outcome::new(
        (MASS_WINDOW.0..=MASS_WINDOW.1).contains(&report.mass),
        format!("mass {:.6} on [-5,5]^3 with 41^3 nodes", report.mass),
    )
}

fn drift_convention() -> Outcome {
    let r = rep(0.0, 1.0);
    let t = 0.5;
    let points = [
        GroupPoint::new(-0.5, 0.2, 0.1),
        GroupPoint::new(0.3, -0.1, 0.2),
        GroupPoint::new(-1.0, 0.0, 0.3),
    ];
    let oracle = oracle_kernel(&r, t, &points, &OracleConfig::default()).unwrap();
    let matches = |drift: DriftConvention| -> (bool, f64) {
        let spec = McSpec {
            n_paths: 50_000,
            n_steps: 256,
            drift,
            ..McSpec::default()
        };
        let mc = kernel_estimates(&r, t, &points, &spec).unwrap();
        let mut all = true;
        let mut worst: f64 = 0.0;
        for (m, o) in mc.iter().zip(&oracle) {
            let sigma = (m.value - o.value).abs() / m.std_error.hypot(o.error_estimate);
            worst = worst.max(sigma);
            all &= sigma <= ERROR_BARS;
        }
        (all, worst)
    };
    let (drifted, ds) = matches(DriftConvention::Drifted);
    let (undrifted, us) = matches(DriftConvention::Undrifted);
    Outcome::new(
        drifted && !undrifted,
        format!("drifted matches={drifted} (worst {ds:.2} sigma), undrifted matches={undrifted} (worst {us:.1} sigma)"),
    )
}

const CD_PAIRS: [(f64, f64); 5] = [(1.0, 0.0), (-1.0, 0.0), (1.0, 1.0), (-2.0, 1.0), (0.0, 1.0)];

/// Returns the outcome for the stated inequality together with whether the
/// documented behaviour (failure exactly where `alpha beta != 0` produces a
/// negative residual, pinned counterexample, corrected form passing) holds.
fn cd_inequality() -> (Outcome, bool) {
    let sweep = |form: CdForm| -> Vec<CdReport> {
        let settings = CdSettings {
            form,
            ..CdSettings::default()
        };
        CD_PAIRS.iter().map(|&(a, b)| cd_sweep(&rep(a, b), &settings).unwrap()).collect()
    };
    let stated = sweep(CdForm::Stated);
    let corrected = sweep(CdForm::Corrected);
    let stated_min = stated.iter().map(|r| r.min_residual).fold(f64::INFINITY, f64::min);
    let corrected_min = corrected.iter().map(|r| r.min_residual).fold(f64::INFINITY, f64::min);
    let failing: Vec<String> = stated
        .iter()
        .filter(|r| !r.passes(CD_TOL))
        .map(|r| format!("({},{})", r.params.alpha, r.params.beta))
        .collect();
    let worst = stated.iter().min_by(|a, b| a.min_residual.total_cmp(&b.min_residual)).unwrap();
    let worst_name = &worst.functions[worst.worst.function].name;

    let calc = FieldCalculus::new(&rep(-2.0, 1.0));
    let p = GroupPoint::new(0.13434463012538123, -0.13736266431580724, 1.0844319372525915);
    let c = carre(&calc, &test_suite()[8].expr, &p).unwrap();
    let counterexample = (c.cd_residual(1.0, &calc.params) - -3.0609047952662776).abs() < 1e-9;

    let documented = failing == ["(-2,1)"] && counterexample && corrected.iter().all(|r| r.passes(CD_TOL));
    let outcome = Outcome::new(
        stated_min >= -CD_TOL,
        format!(
            "stated form min {stated_min:.4} at {failing:?} ({worst_name}); corrected form min {corrected_min:.3e} over 12 x 1000 x 3 x 5"
        ),
    );
    (outcome, documented)
}

fn bump() -> Bump {
    Bump::new(GroupPoint::new(0.3, 0.2, -0.1), 1.5)
}

fn gradient_bounds() -> Outcome {
    let spec = BoundSpec::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for (a, b) in [(1.0, 1.0), (-1.0, 0.0)] {
        let r = rep(a, b);
        let zero = gradient_bound_check(&r, &bump(), 0.0, &spec).unwrap();
        pass &= zero.lhs == zero.rhs;
        let t = 0.5 * window_max(r.params.kappa_cd(), a.abs());
        let g = gradient_bound_check(&r, &bump(), t, &spec).unwrap();
        pass &= g.pass;
        detail.push(format!("grad ({a},{b}) T={t:.4} {:.4} <= {:.4}", g.lhs, g.rhs));
        for t in [0.1, 0.3] {
            let rp = reverse_poincare_check(&r, &bump(), t, &spec).unwrap();
            pass &= rp.pass;
            detail.push(format!("rp ({a},{b}) T={t} {:.4} <= {:.4}", rp.lhs, rp.rhs));
        }
    }
    Outcome::new(pass, format!("T=0 exact; {}", detail.join(", ")))
}

fn determinism() -> Outcome {
    let r = rep(-1.0, 0.0);
    let points = [GroupPoint::new(0.3, 0.2, 0.1), GroupPoint::new(0.0, 0.5, 0.0)];
    let mc_spec = McSpec {
        n_paths: 5000,
        n_steps: 64,
        seed: 7,
        ..McSpec::default()
    };
    let sde = SdeSpec {
        n_paths: 2000,
        n_steps: 32,
        seed: 11,
    };
    let bound_spec = BoundSpec {
        sde,
        ..BoundSpec::default()
    };
    let cd_settings = CdSettings {
        n_points: 50,
        ..CdSettings::default()
    };
    let run = || {
        let kernel = kernel_estimates(&r, 0.5, &points, &mc_spec).unwrap();
        let mass = kernel_mass_check(&rep(0.0, 0.0), 0.5, &GridSpec::cube(4.0, 9), &mc_spec).unwrap();
        let ends = sample_endpoints(&rep(1.0, 1.0), 0.3, &sde).unwrap();
        let bound = reverse_poincare_check(&rep(1.0, 1.0), &bump(), 0.1, &bound_spec).unwrap();
        let cd = cd_sweep(&rep(1.0, 1.0), &cd_settings).unwrap();
        (kernel, mass, ends, bound, cd)
    };
    let in_pool = |threads: usize| ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(run);
    let reference = in_pool(1);
    let same = [in_pool(1), in_pool(2), in_pool(4)].iter().all(|o| *o == reference);
    Outcome::new(same, "kernel, mass, endpoints, bound and sweep outputs equal bit for bit on 1, 2 and 4 workers")
}

fn main() {
    type Criterion = (&'static str, f64, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("classification invariance", 10.0, classification_invariance),
        ("commutation relations", 30.0, commutation_relations),
        ("Mathieu correctness", 10.0, mathieu_correctness),
        ("SE(2) three-way kernel agreement", 300.0, se2_three_way),
        ("Heisenberg MC vs oracle", 300.0, heisenberg_mc_vs_oracle),
        ("mass check", 600.0, mass_check),
        ("drift convention", 600.0, drift_convention),
    ];
    let mut all_ok = true;
    let report = |n: usize, name: &str, outcome: &Outcome, secs: f64, budget: f64| {
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("AC{n} {status} {name} [{secs:.1} s, budget {budget} s]: {}", outcome.detail);
    };
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = f();
        let secs = start.elapsed().as_secs_f64();
        if secs > budget {
            outcome.pass = false;
            outcome.detail.push_str(" (over budget)");
        }
        all_ok &= outcome.pass;
        report(i + 1, name, &outcome, secs, budget);
    }

    let start = Instant::now();
    let (cd, documented) = cd_inequality();
    let secs = start.elapsed().as_secs_f64();
    report(8, "curvature-dimension inequality", &cd, secs, 120.0);
    if !cd.pass {
        println!(
            "    expected: the stated inequality drops a cross term and is false when alpha*beta != 0; pinned behaviour {}",
            if documented { "reproduced" } else { "NOT reproduced" }
        );
    }
    all_ok &= documented && !cd.pass && secs <= 120.0;

    for (n, name, budget, f) in [
        (9, "gradient bound and reverse Poincare", 600.0, gradient_bounds as fn() -> Outcome),
        (10, "determinism", f64::INFINITY, determinism),
    ] {
        let start = Instant::now();
        let mut outcome = f();
        let secs = start.elapsed().as_secs_f64();
        if secs > budget {
            outcome.pass = false;
            outcome.detail.push_str(" (over budget)");
        }
        all_ok &= outcome.pass;
        report(n, name, &outcome, secs, budget);
    }

    if !all_ok {
        println!("acceptance: at least one criterion missed its pinned outcome");
        std::process::exit(1);
    }
    println!("acceptance: all criteria reproduce their pinned outcomes (AC8 fails as documented)");
}
