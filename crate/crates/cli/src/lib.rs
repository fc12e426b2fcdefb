//! The `solvkernel` command-line tool. [`run`] executes one parsed command
//! and returns the process exit code; the `*Output` types are the JSON
//! schemas of the reports it writes.

pub mod args;
mod output;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use solvkernel::algebra::{canonicalize, Classification, LieAlgebra3, SubRiemannianTriple};
use solvkernel::cd_verify::{
    cd_sweep, gradient_bound_check, reverse_poincare_check, window_max, BoundReport, BoundSpec, Bump, CdForm, CdReport,
    CdSettings,
};
use solvkernel::heat_mc::{kernel_estimates, kernel_mass_check, DriftConvention, GridSpec, KernelEstimate, MassReport, McSpec, SdeSpec};
use solvkernel::heat_spectral::{
    mathieu_table, oracle_kernel, se2_kernel, MathieuTableRow, OracleConfig, OracleEstimate, SpectralEstimate,
    SpectralKernelConfig,
};
use solvkernel::linalg::Mat3;
use solvkernel::presets::Preset;
use solvkernel::representation::{AffineRep, GroupPoint};
use solvkernel::tolerance::ToleranceProfile;

use args::*;
pub use output::{format_float, write_atomic};

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid input or a failed computation.
pub const EXIT_ERROR: i32 = 1;
/// Exit code when a requested check fails.
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub source: String,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepOutput {
    pub source: String,
    pub rep: AffineRep,
    pub mat_x: Mat3,
    pub mat_y: Mat3,
    pub mat_r: Mat3,
    pub commutator_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", content = "estimates", rename_all = "lowercase")]
pub enum KernelResults {
    Mc(Vec<KernelEstimate>),
    Spectral(Vec<SpectralEstimate>),
    Oracle(Vec<OracleEstimate>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelOutput {
    pub source: String,
    pub t: f64,
    pub results: KernelResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassOutput {
    pub source: String,
    pub report: MassReport,
    pub window: [f64; 2],
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdOutput {
    pub source: String,
    pub tolerance: f64,
    pub report: CdReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutput {
    pub source: String,
    pub bump: Bump,
    pub reports: Vec<BoundReport>,
    pub pass: bool,
}

/// Any failure, tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<solvkernel::Error> for Failure {
    fn from(e: solvkernel::Error) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_ERROR,
        message: message.into(),
    }
}

/// A resolved structure together with a description of where it came from.
struct Structure {
    label: String,
    classification: Classification,
    rep: AffineRep,
}

fn resolve(src: &SourceArgs) -> Result<Structure, Failure> {
    let (label, triple) = if let Some(p) = &src.preset {
        let preset: Preset = p.parse()?;
        (format!("preset {preset}"), preset.triple())
    } else if let Some(json) = &src.triple {
        let t: SubRiemannianTriple =
            serde_json::from_str(json).map_err(|e| invalid(format!("cannot parse --triple: {e}")))?;
        ("inline triple".to_string(), t)
    } else if let Some(path) = &src.triple_file {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let t: SubRiemannianTriple =
            serde_json::from_str(&text).map_err(|e| invalid(format!("cannot parse {}: {e}", path.display())))?;
        (format!("triple file {}", path.display()), t)
    } else if let (Some(a), Some(b)) = (src.alpha, src.beta) {
        let t = SubRiemannianTriple {
            algebra: LieAlgebra3::canonical(a, b),
            h_basis: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            metric: [[1.0, 0.0], [0.0, 1.0]],
        };
        (format!("alpha = {a}, beta = {b}"), t)
    } else {
        let p = Preset::Heisenberg;
        (format!("preset {p}"), p.triple())
    };
    let tol = ToleranceProfile::default();
    let classification = canonicalize(&triple, &tol)?;
    let rep = AffineRep::build(&classification.form, &classification.regime, &tol)?;
    Ok(Structure {
        label,
        classification,
        rep,
    })
}

fn points(at: &PointArgs) -> Result<Vec<GroupPoint>, Failure> {
    if !(at.t > 0.0 && at.t.is_finite()) {
        return Err(invalid(format!("--t must be positive, got {}", at.t)));
    }
    Ok(at.points.iter().map(|p| GroupPoint::new(p[0], p[1], p[2])).collect())
}

/// What a command produced: text to write and whether its check passed.
struct Artifact {
    text: String,
    pass: bool,
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| invalid(format!("serialisation failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn emit<T: Serialize>(value: &T, out: &OutputArgs, default: Format, csv: impl FnOnce() -> Option<String>) -> Result<String, Failure> {
    match out.format.unwrap_or(default) {
        Format::Json => json(value),
        Format::Csv => csv().ok_or_else(|| invalid("this subcommand has no CSV output; use --format json")),
    }
}

fn kernel_csv(t: f64, results: &KernelResults) -> String {
    let f = format_float;
    let mut s = String::new();
    match results {
        KernelResults::Mc(v) => {
            s.push_str("engine,t,theta,x,y,value,error,n_paths,n_steps,seed,rejects\n");
            for e in v {
                let p = e.point;
                let _ = writeln!(
                    s,
                    "mc,{},{},{},{},{},{},{},{},{},{}",
                    f(t),
                    f(p.theta),
                    f(p.x),
                    f(p.y),
                    f(e.value),
                    f(e.std_error),
                    e.n_paths,
                    e.n_steps,
                    e.seed,
                    e.rejects
                );
            }
        }
        KernelResults::Spectral(v) => {
            s.push_str("engine,t,theta,x,y,value,error,rho_max,truncation_warning\n");
            for e in v {
                let p = e.point;
                let _ = writeln!(
                    s,
                    "spectral,{},{},{},{},{},{},{},{}",
                    f(t),
                    f(p.theta),
                    f(p.x),
                    f(p.y),
                    f(e.value),
                    f(e.error_estimate),
                    f(e.rho_max),
                    e.truncation_warning
                );
            }
        }
        KernelResults::Oracle(v) => {
            s.push_str("engine,t,theta,x,y,value,error,resolution_error,aliasing_error\n");
            for e in v {
                let p = e.point;
                let _ = writeln!(
                    s,
                    "oracle,{},{},{},{},{},{},{},{}",
                    f(t),
                    f(p.theta),
                    f(p.x),
                    f(p.y),
                    f(e.value),
                    f(e.error_estimate),
                    f(e.resolution_error),
                    f(e.aliasing_error)
                );
            }
        }
    }
    s
}

fn mathieu_csv(rows: &[MathieuTableRow]) -> String {
    let mut s = String::from("k,q,a,b\n");
    for r in rows {
        let b = r.b.map(format_float).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", r.k, format_float(r.q), format_float(r.a), b);
    }
    s
}

fn kernel(cmd: &KernelCommand) -> Result<(Artifact, &OutputArgs), Failure> {
    let (source, at, out) = match cmd {
        KernelCommand::Mc(a) => (&a.source, &a.at, &a.out),
        KernelCommand::Spectral(a) => (&a.source, &a.at, &a.out),
        KernelCommand::Oracle(a) => (&a.source, &a.at, &a.out),
    };
    let s = resolve(source)?;
    let pts = points(at)?;
    let results = match cmd {
        KernelCommand::Mc(a) => {
            let spec = McSpec {
                n_paths: a.paths,
                n_steps: a.steps,
                seed: a.seed.seed,
                drift: match a.drift {
                    DriftArg::Drifted => DriftConvention::Drifted,
                    DriftArg::Undrifted => DriftConvention::Undrifted,
                },
                ..McSpec::default()
            };
            KernelResults::Mc(kernel_estimates(&s.rep, at.t, &pts, &spec)?)
        }
        KernelCommand::Spectral(a) => {
            let config = SpectralKernelConfig {
                modes: a.modes,
                n_rho: a.n_rho,
                n_phi: a.n_phi,
                ..SpectralKernelConfig::default()
            };
            let v = pts
                .iter()
                .map(|p| se2_kernel(&s.rep, at.t, p, &config))
                .collect::<Result<Vec<_>, _>>()?;
            KernelResults::Spectral(v)
        }
        KernelCommand::Oracle(a) => {
            let config = OracleConfig {
                n_cells: a.cells,
                n_steps: a.time_steps,
                ..OracleConfig::default()
            };
            KernelResults::Oracle(oracle_kernel(&s.rep, at.t, &pts, &config)?)
        }
    };
    let output = KernelOutput {
        source: s.label,
        t: at.t,
        results,
    };
    let text = emit(&output, out, Format::Csv, || Some(kernel_csv(output.t, &output.results)))?;
    Ok((Artifact { text, pass: true }, out))
}

fn mass_check(a: &MassArgs) -> Result<Artifact, Failure> {
    let s = resolve(&a.source)?;
    let spec = McSpec {
        n_paths: a.paths,
        n_steps: a.steps,
        seed: a.seed.seed,
        ..McSpec::default()
    };
    let report = kernel_mass_check(&s.rep, a.t, &GridSpec::cube(a.half_width, a.nodes), &spec)?;
    let pass = report.mass >= a.min_mass && report.mass <= a.max_mass;
    let output = MassOutput {
        source: s.label,
        report,
        window: [a.min_mass, a.max_mass],
        pass,
    };
    Ok(Artifact {
        text: emit(&output, &a.out, Format::Json, || None)?,
        pass,
    })
}

fn cd_check(a: &CdArgs) -> Result<Artifact, Failure> {
    let s = resolve(&a.source)?;
    let settings = CdSettings {
        n_points: a.points,
        half_width: a.half_width,
        nus: a.nu.clone(),
        seed: a.seed.seed,
        form: match a.form {
            CdFormArg::Stated => CdForm::Stated,
            CdFormArg::Corrected => CdForm::Corrected,
        },
        ..CdSettings::default()
    };
    let mut report = cd_sweep(&s.rep, &settings)?;
    let pass = report.passes(a.tolerance);
    if !a.full {
        report.residuals.clear();
    }
    let output = CdOutput {
        source: s.label,
        tolerance: a.tolerance,
        report,
        pass,
    };
    Ok(Artifact {
        text: emit(&output, &a.out, Format::Json, || None)?,
        pass,
    })
}

fn bound_check(a: &BoundArgs) -> Result<Artifact, Failure> {
    let s = resolve(&a.source)?;
    let params = s.rep.params;
    if params.alpha == 0.0 {
        return Err(invalid("bound-check needs alpha != 0"));
    }
    let bump = Bump::new(GroupPoint::new(a.center[0], a.center[1], a.center[2]), a.radius);
    let spec = BoundSpec {
        sde: SdeSpec {
            n_paths: a.paths,
            n_steps: a.steps,
            seed: a.seed.seed,
        },
        ..BoundSpec::default()
    };
    let mut reports = Vec::new();
    if matches!(a.kind, BoundKindArg::Gradient | BoundKindArg::Both) {
        let t = a.window_fraction * window_max(params.kappa_cd(), params.alpha.abs());
        reports.push(gradient_bound_check(&s.rep, &bump, t, &spec)?);
    }
    if matches!(a.kind, BoundKindArg::ReversePoincare | BoundKindArg::Both) {
        for &t in &a.horizons {
            reports.push(reverse_poincare_check(&s.rep, &bump, t, &spec)?);
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    let output = BoundOutput {
        source: s.label,
        bump,
        reports,
        pass,
    };
    Ok(Artifact {
        text: emit(&output, &a.out, Format::Json, || None)?,
        pass,
    })
}

fn execute(cli: &Cli) -> Result<(Artifact, &OutputArgs), Failure> {
    match &cli.command {
        Command::Classify { source, out } => {
            let s = resolve(source)?;
            let output = ClassifyOutput {
                source: s.label,
                classification: s.classification,
            };
            Ok((Artifact { text: emit(&output, out, Format::Json, || None)?, pass: true }, out))
        }
        Command::Rep { source, out } => {
            let s = resolve(source)?;
            let output = RepOutput {
                source: s.label,
                mat_x: s.rep.mat_x(),
                mat_y: s.rep.mat_y(),
                mat_r: s.rep.mat_r(),
                commutator_residual: s.rep.commutator_residual(),
                rep: s.rep,
            };
            Ok((Artifact { text: emit(&output, out, Format::Json, || None)?, pass: true }, out))
        }
        Command::Kernel(k) => kernel(k),
        Command::MassCheck(a) => Ok((mass_check(a)?, &a.out)),
        Command::CdCheck(a) => Ok((cd_check(a)?, &a.out)),
        Command::BoundCheck(a) => Ok((bound_check(a)?, &a.out)),
        Command::Mathieu(a) => {
            let rows = mathieu_table(a.k_max, &a.q)?;
            let text = emit(&rows, &a.out, Format::Csv, || Some(mathieu_csv(&rows)))?;
            Ok((Artifact { text, pass: true }, &a.out))
        }
    }
}

/// Runs a parsed command, writes its output and returns the exit code.
/// Errors are reported on standard error together with `echo`, the command
/// line that produced them.
pub fn run(cli: &Cli, echo: &str) -> i32 {
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1\n  input: {echo}");
            return EXIT_ERROR;
        }
        // A second initialisation in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = execute(cli).and_then(|(artifact, out)| {
        match &out.output {
            Some(path) => write_atomic(path, &artifact.text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{}", artifact.text),
        }
        Ok(artifact.pass)
    });
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(f) => {
            eprintln!("error: {}\n  input: {echo}", f.message);
            f.code
        }
    }
}
