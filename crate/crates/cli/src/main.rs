mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Numerical laboratory for the confined Willmore-area functional
/// `W_Λ(Σ) = W(Σ) − Λ|Σ|` on closed triangle meshes.
///
/// Lengths are in model units; `λ` is in 1/length².
/// Exit status: 0 success, 1 usage or configuration error, 2 computation
/// error, 3 property-suite failure.
#[derive(Debug, Parser)]
#[command(name = "willmore-lab", version)]
pub struct Cli {
    /// Seed for every random choice (overrides the config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and property checks.
    #[arg(long, global = true, env = "WILLMORE_LAB_THREADS")]
    pub threads: Option<usize>,
    /// Directory receiving outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Configuration file; a run manifest is accepted too.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated surface as OBJ and print its metrics.
    Generate(GenerateArgs),
    /// Report energies of an OBJ mesh, and its confinement if a domain is given.
    Evaluate(EvaluateArgs),
    /// Minimize W_Λ inside a domain from an initial OBJ mesh.
    Minimize(MinimizeArgs),
    /// Sweep λ over a grid and estimate C_Λ and the threshold.
    Sweep(SweepArgs),
    /// Run the randomized property suite.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Icosphere,
    Dante,
    Torus,
    CappedCylinder,
    Ellipsoid,
    Pancake,
}

impl Kind {
    pub fn grammar_name(self) -> &'static str {
        match self {
            Kind::Icosphere => "icosphere",
            Kind::Dante => "dante",
            Kind::Torus => "torus",
            Kind::CappedCylinder => "capped_cylinder",
            Kind::Ellipsoid => "ellipsoid",
            Kind::Pancake => "pancake",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Surface family; omit when `--spec` is given.
    #[arg(required_unless_present = "spec", conflicts_with = "spec")]
    pub kind: Option<Kind>,
    /// Full generator expression, e.g. "union(icosphere(r=1) | icosphere(r=0.5))".
    #[arg(long)]
    pub spec: Option<String>,
    /// Radius (icosphere, capped cylinder, pancake).
    #[arg(long)]
    pub r: Option<f64>,
    /// Subdivision level (icosphere, dante, ellipsoid).
    #[arg(long)]
    pub level: Option<u32>,
    /// Dante weight λ, in 1/length²; must exceed 1/ball_r².
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Number of Dante spheres.
    #[arg(long)]
    pub k: Option<usize>,
    /// Radius of the ball holding the Dante spheres.
    #[arg(long)]
    pub ball_r: Option<f64>,
    #[arg(long)]
    pub major: Option<f64>,
    #[arg(long)]
    pub minor: Option<f64>,
    /// Segment count; torus takes "major,minor".
    #[arg(long)]
    pub segments: Option<String>,
    /// Cylinder height.
    #[arg(long)]
    pub h: Option<f64>,
    /// Ellipsoid equatorial semi-axis.
    #[arg(long)]
    pub a: Option<f64>,
    /// Ellipsoid polar semi-axis.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub thickness: Option<f64>,
    /// Center as "x,y,z".
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<String>,
    /// Symmetry axis: x, y or z.
    #[arg(long)]
    pub axis: Option<String>,
    /// Radial noise: each vertex distance from the center is scaled by
    /// 1 + U(−f, f), drawn from `--seed`.
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Output path (default: <out-dir>/<kind>.obj).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub mesh: PathBuf,
    /// Weight λ, in 1/length².
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Domain expression, e.g. "ball(r=1)".
    #[arg(long)]
    pub domain: Option<String>,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    pub mesh: PathBuf,
    /// Weight λ, in 1/length².
    #[arg(long)]
    pub lambda: f64,
    /// Domain expression (overrides the config file).
    #[arg(long)]
    pub domain: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Domain expression (overrides the config file).
    #[arg(long)]
    pub domain: Option<String>,
    /// Comma-separated λ grid in 1/length² (default: derived from the domain).
    #[arg(long, allow_hyphen_values = true)]
    pub lambdas: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Multiplies every property tolerance.
    #[arg(long)]
    pub tolerance_scale: Option<f64>,
    /// Perturbed samples per population member.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
