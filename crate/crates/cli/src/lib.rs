//! `rupture-lab`: command-line driver for rupture-core.
//!
//! Every command writes its artifacts where `--out` points and a
//! schema-versioned JSON summary to `--summary` (stdout by default).

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod spec;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "RUPTURE_LAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "rupture-lab", version, about = "Numerical laboratory for rupture sets of Δu = u^-p + f")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every randomized routine.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the JSON summary (stdout when absent).
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an exact or seeded field to an RFLD file.
    MakeExact(MakeExactArgs),
    /// Solve the stationary problem from an initial field.
    Solve(SolveArgs),
    /// Run the parabolic flow and record snapshots.
    Evolve(EvolveArgs),
    /// Density, frequency and pinching along a radius ladder.
    Density(DensityArgs),
    /// Scan sample points for the quantitative stratum.
    Stratify(StratifyArgs),
    /// Minkowski neighborhoods of sublevel or threshold sets.
    Minkowski(MinkowskiArgs),
    /// Displacement and rectifiability integral of a point cloud.
    Displacement(DisplacementArgs),
    /// Greedy Vitali subfamily of equal balls around a point cloud.
    Cover(CoverArgs),
    /// Run the property suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Radial,
    Cylinder,
    Ode,
    Seeded,
}

#[derive(Debug, Args)]
pub struct MakeExactArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum, default_value = "radial")]
    pub kind: FieldKind,
    /// Cells per axis.
    #[arg(long)]
    pub shape: usize,
    /// The box is [−L, L]ⁿ.
    #[arg(long, default_value_t = 1.0)]
    pub half_width: f64,
    /// Value at the axis for `--kind ode`.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Perturbation size for `--kind seeded`.
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub forcing: Option<PathBuf>,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of residual and energy per recorded step.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub forcing: Option<PathBuf>,
    #[arg(long)]
    pub config: PathBuf,
    /// Final snapshot.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of time, energy and min u per snapshot.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub forcing: Option<PathBuf>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// `min:max:count`, geometric.
    #[arg(long)]
    pub radii: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StratifyArgs {
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    /// Sample points as a point-cloud CSV (weights ignored).
    #[arg(long, conflicts_with = "pitch")]
    pub points: Option<PathBuf>,
    /// Lattice pitch for samples inside `--within` around `--center`.
    #[arg(long)]
    pub pitch: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub within: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MinkowskiArgs {
    #[arg(long)]
    pub field: PathBuf,
    /// `min:max:count`, geometric.
    #[arg(long)]
    pub radii: String,
    /// Sublevel sets `{u < ε r^α}`; needs `--p`.
    #[arg(long, conflicts_with = "threshold")]
    pub eps: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Fixed set `{u < t}`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Dimension used to normalize the contents.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub within: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DisplacementArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long)]
    pub k: usize,
    /// `min:max:count`, geometric.
    #[arg(long)]
    pub radii: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub radius: f64,
    /// Content exponent in `Σ (r/R)ᵏ`.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub big_r: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Every criterion at its base resolution.
    Quick,
    /// Adds the refinement studies.
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub suite: Suite,
    /// Comma-separated criterion numbers to run.
    #[arg(long)]
    pub only: Option<String>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rupture-lab: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let seed = effective_seed(cli.seed)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(CliError::config)?;
    let ctx = commands::Context { seed, threads: pool.current_num_threads(), summary: cli.summary };
    pool.install(|| commands::dispatch(&ctx, cli.command))
}

fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|e| CliError::config(format!("{SEED_ENV}={v:?}: {e}"))),
        Err(_) => Ok(flag),
    }
}
