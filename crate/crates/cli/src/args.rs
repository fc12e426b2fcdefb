use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use solvkernel::rng::DEFAULT_SEED;

/// Sub-Riemannian solvable groups: classification, heat kernels and curvature checks.
///
/// Exit status: 0 on success, 1 on invalid input or a computation error,
/// 2 when a requested check (mass window, inequality) fails.
#[derive(Debug, Parser)]
#[command(name = "solvkernel", version)]
pub struct Cli {
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical form, regime and geometric constants of a triple (JSON).
    Classify {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The affine matrix representation of a triple (JSON).
    Rep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Heat kernel values.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Integral of the Monte Carlo kernel over a truncated grid.
    MassCheck(MassArgs),
    /// Sweep of the curvature-dimension residual over the test-function suite.
    CdCheck(CdArgs),
    /// Monte Carlo checks of the semigroup gradient bound and reverse Poincare inequality.
    BoundCheck(BoundArgs),
    /// Table of Mathieu characteristic values.
    ///
    /// CSV columns: k, q, a (a_k(q)), b (b_k(q), empty for k = 0).
    Mathieu(MathieuArgs),
}

/// Where the structure comes from. Exactly one source is allowed; the
/// default is the Heisenberg preset.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// heisenberg, se2, solv-minus, rank1-beta:<beta> or delta-zero:<lambda>.
    #[arg(long, conflicts_with_all = ["triple", "triple_file", "alpha"])]
    pub preset: Option<String>,
    /// Inline JSON triple `{"c": ..., "H": ..., "metric": ...}`.
    #[arg(long, conflicts_with_all = ["triple_file", "alpha"])]
    pub triple: Option<String>,
    /// File holding a JSON triple.
    #[arg(long, conflicts_with = "alpha")]
    pub triple_file: Option<PathBuf>,
    /// Canonical parameter alpha (with --beta).
    #[arg(long, requires = "beta", allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Canonical parameter beta >= 0 (with --alpha).
    #[arg(long, requires = "alpha", allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file, written atomically; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Output format; the default depends on the subcommand.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Base seed of all random streams.
    #[arg(long, env = "SOLVKERNEL_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriftArg {
    Drifted,
    Undrifted,
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// Brownian-bridge Monte Carlo estimate.
    ///
    /// CSV columns: engine, t, theta, x, y, value, error (one standard error),
    /// n_paths, n_steps, seed, rejects.
    Mc(McArgs),
    /// Mathieu series for SE(2).
    ///
    /// CSV columns: engine, t, theta, x, y, value, error (full minus half
    /// resolution), rho_max, truncation_warning.
    Spectral(SpectralArgs),
    /// Fourier transform in (x, y) with a Crank-Nicolson solve in theta.
    ///
    /// CSV columns: engine, t, theta, x, y, value, error (resolution plus
    /// aliasing), resolution_error, aliasing_error.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[arg(long)]
    pub t: f64,
    /// Evaluation point `theta,x,y`; repeat for several points.
    #[arg(long = "point", required = true, value_parser = parse_point, allow_negative_numbers = true)]
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub at: PointArgs,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = DriftArg::Drifted)]
    pub drift: DriftArg,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub at: PointArgs,
    /// Mathieu modes per family.
    #[arg(long, default_value_t = 16)]
    pub modes: usize,
    /// Gauss-Legendre nodes in rho (multiple of 32).
    #[arg(long, default_value_t = 256)]
    pub n_rho: usize,
    #[arg(long, default_value_t = 256)]
    pub n_phi: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub at: PointArgs,
    /// Theta cells of the fine grid.
    #[arg(long, default_value_t = 512)]
    pub cells: usize,
    /// Time steps of the fine grid.
    #[arg(long, default_value_t = 128)]
    pub time_steps: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MassArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    /// Half-width of the cube `[-w, w]^3`.
    #[arg(long, default_value_t = 5.0)]
    pub half_width: f64,
    /// Nodes per axis.
    #[arg(long, default_value_t = 41)]
    pub nodes: usize,
    #[arg(long, default_value_t = 4000)]
    pub paths: usize,
    #[arg(long, default_value_t = 128)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.97)]
    pub min_mass: f64,
    #[arg(long, default_value_t = 1.01)]
    pub max_mass: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CdFormArg {
    Stated,
    Corrected,
}

#[derive(Debug, Clone, Args)]
pub struct CdArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 1.0, 10.0])]
    pub nu: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Points are drawn uniformly from `[-w, w]^3`.
    #[arg(long, default_value_t = 1.5)]
    pub half_width: f64,
    #[arg(long, value_enum, default_value_t = CdFormArg::Stated)]
    pub form: CdFormArg,
    /// Smallest admissible residual is `-tolerance`.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Include every residual in the JSON report.
    #[arg(long)]
    pub full: bool,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKindArg {
    Gradient,
    ReversePoincare,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum, default_value_t = BoundKindArg::Both)]
    pub kind: BoundKindArg,
    /// Horizons for the reverse Poincare inequality.
    #[arg(long = "horizon", value_delimiter = ',', default_values_t = [0.1, 0.3])]
    pub horizons: Vec<f64>,
    /// Horizon of the gradient bound as a fraction of the admissible window.
    #[arg(long, default_value_t = 0.5)]
    pub window_fraction: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 128)]
    pub steps: usize,
    /// Bump centre `theta,x,y`.
    #[arg(long, value_parser = parse_point, default_value = "0.3,0.2,-0.1", allow_negative_numbers = true)]
    pub center: [f64; 3],
    #[arg(long, default_value_t = 1.5)]
    pub radius: f64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MathieuArgs {
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 5.0, 25.0])]
    pub q: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected `theta,x,y`, got `{s}`"));
    }
    let mut p = [0.0; 3];
    for (slot, part) in p.iter_mut().zip(parts) {
        *slot = part.parse::<f64>().map_err(|_| format!("`{part}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("`{part}` is not finite"));
        }
    }
    Ok(p)
}
