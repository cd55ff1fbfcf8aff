//! Command-line front end for `sdlift-core`.
//!
//! Exit codes: 0 success or pass, 1 a check failed, 2 invalid input or IO
//! failure, 3 numerical degeneracy.

// Negated float comparisons are deliberate: NaN must fail every tolerance test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod docs;

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_CONJUGACY_TOL: f64 = 1e-6;
pub const DEFAULT_CRITERION_TOL: f64 = 1e-6;
pub const DEFAULT_PATHS: usize = 20;
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sdlift", version, about = "Self-stresses and liftings of semi-discrete frameworks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a framework or surface document and report its regularity.
    Validate(ValidateArgs),
    /// March a self-stress from initial values of lambda and a prescribed mu_-1.
    Solve(SolveArgs),
    /// Check equilibrium, force loads and path independence of a stress.
    Check(CheckArgs),
    /// Lift a self-stressed framework to a semi-discrete surface.
    Lift(LiftArgs),
    /// Project a conjugate surface to a framework with its induced stress.
    Project(ProjectArgs),
    /// Test the one-strip liftability criterion.
    Onestrip(OnestripArgs),
    /// Write a built-in scenario bundle.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Obj,
    Csv,
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 16 || !n.is_multiple_of(2) {
        return Err(format!("grid must be even and at least 16, got {n}"));
    }
    Ok(n)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(format!("tolerance must be positive, got {s}"));
    }
    Ok(x)
}

#[derive(Debug, Args)]
pub struct GridArg {
    /// Number of grid panels (even, at least 16).
    #[arg(long = "grid", default_value_t = sdlift_core::numerics::DEFAULT_PANELS, value_parser = parse_grid)]
    pub panels: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArg,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArg,
    /// Comma-separated lambda_i(0), one per curve 0..=n; defaults to all ones.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda0: Option<Vec<f64>>,
    /// A constant, or a JSON coordinate `{"poly": [...], "trig": [...]}`.
    #[arg(long = "mu-minus1", default_value = "0", allow_hyphen_values = true)]
    pub mu_minus1: String,
    /// Residual tolerance for the solved stress.
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Stress document path; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub stress: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Random increasing paths per curve for the path-independence test.
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    pub paths: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub stress: PathBuf,
    #[arg(long, default_value_t = DEFAULT_RESIDUAL_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Lift along L-shaped paths even if the stress is not a self-stress.
    #[arg(long)]
    pub force: bool,
    /// Output stem; writes `<stem>.obj` and `<stem>.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Format written to stdout when no output stem is given.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Omit the timestamp from the OBJ header.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArg,
    /// Largest accepted strip defect and conjugacy residual.
    #[arg(long, default_value_t = DEFAULT_CONJUGACY_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Output stem; writes `<stem>.framework.json` and `<stem>.stress.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OnestripArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArg,
    #[arg(long, default_value_t = DEFAULT_CRITERION_TOL, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// One of the built-in scenario names.
    pub name: String,
    /// Directory receiving the bundle.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridArg,
    /// Number of interior strips for the planar families.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub amplitude: f64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {failure}");
            failure.exit_code()
        }
    }
}
