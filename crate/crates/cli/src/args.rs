use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resetdf::reset::{DEFAULT_CONVERGENCE_GRID, DEFAULT_MIN_RESET_INTERVAL};
use resetdf::sim::SettleOptions;

use crate::exit::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "resetdf",
    version,
    about = "Steady-state harmonics of open-loop reset elements under sinusoidal input"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the element matrices, eigenvalues and the convergence scan.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Info(InfoArgs),
    /// Simulate from rest and write the trace plus its steady-state period.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Closed-form describing functions H_k over a frequency grid.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Hosidf(HosidfArgs),
    /// Compare closed-form H_k with harmonics of the simulated steady state.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Validate(ValidateArgs),
    /// Split one steady-state period into base-linear and nonlinear parts.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Decompose(DecomposeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Integrator,
    Fore,
    Sore,
    Custom,
}

#[derive(Clone, Debug, Args)]
pub struct ElementArgs {
    /// Element family; implied `custom` when --A is given.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Corner frequency of fore/sore, rad/s.
    #[arg(long, default_value_t = 100.0)]
    pub omega_r: f64,
    /// Damping ratio of sore.
    #[arg(long, default_value_t = 0.1)]
    pub beta_r: f64,
    /// Number of integrator states.
    #[arg(long)]
    pub m: Option<usize>,
    /// State matrix of a custom element, e.g. "0,1;-10000,-20".
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long = "C", allow_hyphen_values = true)]
    pub c: Option<String>,
    /// Feedthrough; zero when omitted.
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: Option<String>,
    /// Reset matrix, or a scalar g meaning g*I.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub rho: String,
    /// Minimum time between resets, s.
    #[arg(long, default_value_t = DEFAULT_MIN_RESET_INTERVAL)]
    pub delta_m: f64,
    /// Read further flags from a file (whitespace separated, '#' starts a comment);
    /// flags on the command line take precedence.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct GateArgs {
    /// Horizon of the convergence scan, s; derived from the dynamics when omitted.
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Points in the convergence scan.
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_GRID)]
    pub n_grid: usize,
    /// Continue even when the convergence scan fails.
    #[arg(long)]
    pub force: bool,
}

#[derive(Clone, Debug, Args)]
pub struct FreqArgs {
    /// Single input frequency, rad/s.
    #[arg(long, conflicts_with_all = ["omega_start", "omega_stop"])]
    pub omega: Option<f64>,
    /// First point of a log-spaced grid, rad/s.
    #[arg(long, requires = "omega_stop")]
    pub omega_start: Option<f64>,
    #[arg(long, requires = "omega_start")]
    pub omega_stop: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub omega_count: usize,
    /// Frequencies are given in Hz.
    #[arg(long)]
    pub hz: bool,
}

#[derive(Clone, Debug, Args)]
pub struct SingleFreqArgs {
    /// Input frequency, rad/s.
    #[arg(long)]
    pub omega: f64,
    /// The frequency is given in Hz.
    #[arg(long)]
    pub hz: bool,
}

#[derive(Clone, Debug, Args)]
pub struct SteadyArgs {
    /// Input amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Samples per period (multiple of 8); chosen from the dynamics when omitted.
    #[arg(long)]
    pub samples_per_period: Option<usize>,
    /// Relative period-to-period change accepted as steady state.
    #[arg(long, default_value_t = SettleOptions::default().tol)]
    pub steady_tol: f64,
    /// Give up after this many periods.
    #[arg(long, default_value_t = SettleOptions::default().max_periods)]
    pub max_periods: usize,
}

#[derive(Clone, Debug, Args)]
pub struct InfoArgs {
    #[command(flatten)]
    pub element: ElementArgs,
    #[command(flatten)]
    pub gate: GateArgs,
    /// Input frequency used for the scan horizon of non-decaying elements, rad/s.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub hz: bool,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub element: ElementArgs,
    #[command(flatten)]
    pub freq: SingleFreqArgs,
    /// Input amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Periods to simulate.
    #[arg(long, default_value_t = 20)]
    pub periods: usize,
    #[arg(long)]
    pub samples_per_period: Option<usize>,
    #[arg(long, default_value_t = SettleOptions::default().tol)]
    pub steady_tol: f64,
    /// Simulate the base-linear system (no resets).
    #[arg(long)]
    pub no_reset: bool,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct HosidfArgs {
    #[command(flatten)]
    pub element: ElementArgs,
    #[command(flatten)]
    pub freq: FreqArgs,
    #[command(flatten)]
    pub gate: GateArgs,
    /// Highest harmonic order.
    #[arg(long, default_value_t = 9)]
    pub k: usize,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub element: ElementArgs,
    #[command(flatten)]
    pub freq: FreqArgs,
    #[command(flatten)]
    pub gate: GateArgs,
    #[command(flatten)]
    pub steady: SteadyArgs,
    #[arg(long, default_value_t = 9)]
    pub k: usize,
    /// Largest accepted error.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Multiplies Q in the closed form (sensitivity check).
    #[arg(long, default_value_t = 1.0)]
    pub q_scale: f64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub element: ElementArgs,
    #[command(flatten)]
    pub freq: SingleFreqArgs,
    #[command(flatten)]
    pub gate: GateArgs,
    #[command(flatten)]
    pub steady: SteadyArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Replaces `--spec-file PATH` by the flags in that file, placed right after the
/// subcommand so that later command-line flags override them.
pub fn expand_spec_file(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--spec-file" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Usage("--spec-file: missing path".into()))?;
            path = Some(PathBuf::from(p));
        } else if let Some(p) = s.strip_prefix("--spec-file=") {
            path = Some(PathBuf::from(p));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("--spec-file {}: {e}", path.display())))?;
    let tokens: Vec<OsString> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(OsString::from)
        .collect();
    if rest.len() < 2 {
        return Err(CliError::Usage("--spec-file needs a subcommand".into()));
    }
    let tail = rest.split_off(2);
    rest.extend(tokens);
    rest.extend(tail);
    Ok(rest)
}
