//! `modspace` — simulate nonlinear systems, re-embed their trajectories in
//! input/output/gain coordinates, and render the resulting figures.
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 numeric failure,
//! 4 signal not oscillatory.

mod artifacts;
mod commands;
mod error;
mod figures;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "modspace", version, about = "Modulation phase space analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a system and write trajectory.csv plus a run manifest
    Simulate(RunArgs),
    /// Run the full pipeline: trace, phase, symmetry, manifold, classification
    Analyze(RunArgs),
    /// Statically classify the nonlinear term of a definition (no simulation)
    Classify(ClassifyArgs),
    /// Render SVG figures from a previous run's artifacts
    Render(RenderArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in system name (see `--system help` for the list)
    #[arg(long, conflicts_with = "def")]
    system: Option<String>,

    /// Path to a system definition file
    #[arg(long, value_name = "PATH")]
    def: Option<PathBuf>,

    /// Scale one parameter by 1 + REL, e.g. `d:-0.10`
    #[arg(long, value_name = "PARAM:REL")]
    perturb: Option<String>,

    /// Integration method
    #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
    method: MethodArg,

    /// Fixed step (RK4) and uniform output grid spacing
    #[arg(long, default_value_t = 0.01)]
    dt: f64,

    #[arg(long = "t-end", default_value_t = 2000.0)]
    t_end: f64,

    /// Fraction of samples discarded as transient
    #[arg(long, default_value_t = 0.5)]
    transient: f64,

    /// Absolute tolerance (adaptive method only)
    #[arg(long = "abs-tol", default_value_t = 1e-9)]
    abs_tol: f64,

    /// Relative tolerance (adaptive method only)
    #[arg(long = "rel-tol", default_value_t = 1e-9)]
    rel_tol: f64,

    /// Seed for the quasi-random sampling used by classification
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Classical fixed-step Runge–Kutta
    Rk4,
    /// Adaptive Dormand–Prince 5(4), resampled onto the dt grid
    Dp45,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Definition file to classify
    #[arg(value_name = "PATH", conflicts_with = "system")]
    path: Option<PathBuf>,

    /// Classify a built-in system instead of a file
    #[arg(long)]
    system: Option<String>,

    /// Seed for the quasi-random sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RenderArgs {
    /// Which figure to produce
    #[arg(long, value_enum)]
    figure: FigureArg,

    /// Directory holding the run's artifacts; figures are written there too
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Second run directory overlaid as the perturbed curve (polar figure)
    #[arg(long, value_name = "DIR")]
    perturbed: Option<PathBuf>,

    /// Number of frames for the input-output-space animation
    #[arg(long, default_value_t = 1)]
    frames: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    /// Sigmoid + modulation envelope + cycle + tangent, one SVG per frame
    #[value(name = "io_space")]
    IoSpace,
    /// Three pairwise projections of the input/output/gain trajectory
    #[value(name = "iog_views")]
    IogViews,
    /// Output vs time with gain color-coded and extrema annotated
    #[value(name = "timeseries_gain")]
    TimeseriesGain,
    /// Normalized gain vs oscillation phase, base solid / perturbed dashed
    #[value(name = "polar_phase_gain")]
    PolarPhaseGain,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Analyze(args) => commands::analyze(&args),
        Command::Classify(args) => commands::classify(&args),
        Command::Render(args) => commands::render(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.code());
    }
}
