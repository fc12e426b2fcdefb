use solvkernel::algebra::Params;
use solvkernel::heat_mc::{kernel_point_estimate, McSpec};
use solvkernel::heat_spectral::{oracle_kernel, se2_kernel, OracleConfig, SpectralKernelConfig};
use solvkernel::representation::{AffineRep, GroupPoint};
use solvkernel::tolerance::ToleranceProfile;

fn rep(a: f64, b: f64) -> AffineRep {
    AffineRep::from_params(Params::new(a, b), &ToleranceProfile::default()).unwrap()
}

/// Heisenberg kernel values from the Mehler formula for `d_s^2 - lambda^2 s^2`,
/// integrated over the dual variables with adaptive quadrature in SciPy.
const MEHLER: [([f64; 4], f64); 7] = [
    ([0.0, 0.0, 0.0, 1.0], 0.0625),
    ([0.0, 0.0, 0.0, 0.5], 0.25),
    ([0.5, 0.2, 0.1, 1.0], 0.05152968052663449),
    ([0.5, 0.0, 0.0, 1.0], 0.05530656787628217),
    ([0.0, 0.5, 0.0, 1.0], 0.03562087273708636),
    ([0.0, 0.0, 0.5, 1.0], 0.05530656787628214),
    ([0.5, 0.5, 0.5, 1.0], 0.03779749187767312),
];

#[test]
fn heisenberg_oracle_matches_mehler_formula() {
    let r = rep(0.0, 0.0);
    for t in [0.5, 1.0] {
        let cases: Vec<_> = MEHLER.iter().filter(|(p, _)| p[3] == t).collect();
        let points: Vec<GroupPoint> = cases.iter().map(|(p, _)| GroupPoint::new(p[0], p[1], p[2])).collect();
        let est = oracle_kernel(&r, t, &points, &OracleConfig::default()).unwrap();
        for ((_, want), e) in cases.iter().zip(&est) {
            assert!((e.value - want).abs() <= 2e-5 * want, "{:?} t={t}: {} vs {want}", e.point, e.value);
            assert!(e.error_estimate < 1e-3 * want);
        }
    }
}

#[test]
fn heisenberg_monte_carlo_matches_mehler_formula() {
    let r = rep(0.0, 0.0);
    let spec = McSpec {
        n_paths: 40_000,
        n_steps: 128,
        ..McSpec::default()
    };
    let e = kernel_point_estimate(&r, 1.0, &GroupPoint::new(0.5, 0.2, 0.1), &spec).unwrap();
    assert!((e.value - MEHLER[2].1).abs() <= 3.0 * e.std_error, "{} +- {}", e.value, e.std_error);
}

#[test]
fn se2_spectral_and_oracle_agree_at_interior_points() {
    let r = rep(-1.0, 0.0);
    let t = 0.5;
    let points = [
        GroupPoint::new(0.3, 0.2, 0.1),
        GroupPoint::new(0.0, 0.5, 0.0),
        GroupPoint::new(-0.4, 0.1, -0.3),
        GroupPoint::new(0.8, -0.2, 0.3),
        GroupPoint::new(0.0, 0.0, 0.0),
    ];
    let oracle = oracle_kernel(&r, t, &points, &OracleConfig::default()).unwrap();
    for (p, o) in points.iter().zip(&oracle) {
        let s = se2_kernel(&r, t, p, &SpectralKernelConfig::default()).unwrap();
        assert!(!s.truncation_warning);
        assert!(s.imag.abs() <= 1e-8);
        let tol = 3.0 * s.error_estimate.hypot(o.error_estimate);
        assert!((s.value - o.value).abs() <= tol, "{p:?}: spectral {} oracle {} tol {tol}", s.value, o.value);
        assert!((s.value - o.value).abs() <= 1e-3 * s.value);
    }
}

#[test]
fn se2_spectral_is_invariant_under_phi_origin() {
    let r = rep(-1.0, 0.0);
    let p = GroupPoint::new(0.3, 0.2, 0.1);
    let base = SpectralKernelConfig {
        n_rho: 128,
        n_phi: 128,
        ..SpectralKernelConfig::default()
    };
    let a = se2_kernel(&r, 0.5, &p, &base).unwrap();
    for offset in [0.37, std::f64::consts::FRAC_PI_2] {
        let b = se2_kernel(&r, 0.5, &p, &SpectralKernelConfig { phi_offset: offset, ..base }).unwrap();
        assert!((a.value - b.value).abs() < 1e-10, "{offset}: {} vs {}", a.value, b.value);
    }
    assert!((a.value - 0.22508863).abs() < 1e-7);
}
