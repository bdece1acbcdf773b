//! Command-line arguments and the resolved, serializable run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use strobofp::frames::FrameDistribution;
use strobofp::params::DEFAULT_CUTOFF_ETA;
use strobofp::sweep::{rho_range, SweepSettings};

use crate::error::{CliError, CliResult};

/// Either one `rho` or an inclusive `lo:hi:step` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoSpec {
    Single(f64),
    Range { lo: f64, hi: f64, step: f64 },
}

impl RhoSpec {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        match *self {
            RhoSpec::Single(r) => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(CliError::usage(format!(
                        "rho must be finite and > 0, got {r}"
                    )));
                }
                Ok(vec![r])
            }
            RhoSpec::Range { lo, hi, step } => {
                if !(lo > 0.0) {
                    return Err(CliError::usage(format!(
                        "range start must be > 0, got {lo}"
                    )));
                }
                rho_range(lo, hi, step).map_err(|e| CliError::usage(format!("invalid range: {e}")))
            }
        }
    }

    pub fn single(&self) -> CliResult<f64> {
        match *self {
            RhoSpec::Single(r) => Ok(r),
            RhoSpec::Range { .. } => Err(CliError::usage("this command takes a single --rho")),
        }
    }
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::Single(r) => write!(f, "{r}"),
            RhoSpec::Range { lo, hi, step } => write!(f, "{lo}:{hi}:{step}"),
        }
    }
}

/// Parse `lo:hi:step`.
pub fn parse_range(s: &str) -> Result<RhoSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got '{s}'"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) {
        return Err(format!("step must be > 0, got {step}"));
    }
    if hi < lo {
        return Err(format!("hi ({hi}) is below lo ({lo})"));
    }
    Ok(RhoSpec::Range { lo, hi, step })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Meantau,
    Survival,
    Spectrum,
    Fit,
    Mc,
    Figures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    Boundary,
    Bulk,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything a command needs, after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub rho: Option<RhoSpec>,
    pub y0: f64,
    pub n_grid: Option<usize>,
    pub eta: f64,
    pub dist: FrameDistribution,
    pub trials: u64,
    pub seed: u64,
    pub n_max: usize,
    pub modesum: bool,
    pub model: Option<FitKind>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub histogram: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            rho: None,
            y0: 0.5,
            n_grid: None,
            eta: DEFAULT_CUTOFF_ETA,
            dist: FrameDistribution::Deterministic,
            trials: 100_000,
            seed: 1,
            n_max: 200,
            modesum: false,
            model: None,
            format: OutputFormat::Csv,
            out: None,
            histogram: None,
        }
    }

    pub fn settings(&self) -> SweepSettings {
        SweepSettings {
            eta: self.eta,
            n_grid: self.n_grid,
            dist: self.dist,
            ..SweepSettings::default()
        }
    }

    pub fn rhos(&self) -> CliResult<Vec<f64>> {
        self.rho
            .ok_or_else(|| CliError::usage("one of --rho or --rho-range is required"))?
            .values()
    }

    pub fn single_rho(&self) -> CliResult<f64> {
        self.rho
            .ok_or_else(|| CliError::usage("--rho is required"))?
            .single()
    }
}

fn parse_dist(s: &str) -> Result<FrameDistribution, String> {
    FrameDistribution::from_str(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "strobofp",
    version,
    about = "Exit statistics of Brownian motion observed at discrete frames",
    after_help = "Ranges: --rho-range lo:hi:step yields lo, lo+step, ... for every value below hi + step/2.\n\
                  Set STROBOFP_THREADS to cap the worker pool.\n\
                  Exit codes: 0 success, 2 usage error, 3 numerical failure."
)]
pub struct Cli {
    /// Print the resolved run configuration as JSON to stderr
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean exit frame and leading eigenvalue per rho (CSV)
    Meantau(MeantauArgs),
    /// Survival probabilities S_n for one rho (CSV)
    Survival(SurvivalArgs),
    /// Leading eigenvalue, gap and expansion comparison per rho (CSV)
    Spectrum(SpectrumArgs),
    /// Fit sweep data to an asymptotic model (JSON)
    Fit(FitArgs),
    /// Monte Carlo exit times compared with the resolvent (JSON)
    Mc(McArgs),
    /// Figure data (CSV) and gnuplot scripts
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    /// Confinement ratio
    #[arg(long, conflicts_with = "rho_range")]
    pub rho: Option<f64>,
    /// Sweep lo:hi:step, inclusive of lo, values below hi + step/2
    #[arg(long, value_parser = parse_range)]
    pub rho_range: Option<RhoSpec>,
}

impl RhoArgs {
    fn spec(&self) -> Option<RhoSpec> {
        self.rho.map(RhoSpec::Single).or(self.rho_range)
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Grid size override (default max(64, ceil(18 rho)))
    #[arg(long)]
    pub n_grid: Option<usize>,
    /// Kernel cutoff in units of the step scale
    #[arg(long, default_value_t = DEFAULT_CUTOFF_ETA)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeantauArgs {
    #[command(flatten)]
    pub rho: RhoArgs,
    /// Start position in [0, 1]
    #[arg(long, default_value_t = 0.5)]
    pub y0: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frame-interval law: deterministic | twopoint:u1,u2,p | jitter:eps | exponential
    #[arg(long, value_parser = parse_dist, default_value = "deterministic")]
    pub dist: FrameDistribution,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SurvivalArgs {
    /// Confinement ratio
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.5)]
    pub y0: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frame-interval law
    #[arg(long, value_parser = parse_dist, default_value = "deterministic")]
    pub dist: FrameDistribution,
    /// Last frame index
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,
    /// Add the sine-mode sum as a third column (y0 = 0 or 0.5)
    #[arg(long)]
    pub modesum: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub rho: RhoArgs,
    /// Start position used for the amplitude a0
    #[arg(long, default_value_t = 0.5)]
    pub y0: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_parser = parse_dist, default_value = "deterministic")]
    pub dist: FrameDistribution,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Model to fit; fixes the start point (boundary: y0 = 0, bulk: y0 = 0.5)
    #[arg(long, value_enum)]
    pub model: FitKind,
    /// Sweep lo:hi:step (default 20:200:10, gap 20:120:10)
    #[arg(long, value_parser = parse_range)]
    pub rho_range: Option<RhoSpec>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_parser = parse_dist, default_value = "deterministic")]
    pub dist: FrameDistribution,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Confinement ratio
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.5)]
    pub y0: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_parser = parse_dist, default_value = "deterministic")]
    pub dist: FrameDistribution,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write the exit-frame histogram as CSV
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Sweep for the boundary and bulk figures (default 20:200:10)
    #[arg(long, value_parser = parse_range)]
    pub rho_range: Option<RhoSpec>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output directory
    #[arg(long, default_value = "figures")]
    pub out: PathBuf,
}

impl Command {
    /// Resolve parsed arguments into a [`RunConfig`].
    pub fn into_config(self) -> RunConfig {
        match self {
            Command::Meantau(a) => RunConfig {
                rho: a.rho.spec(),
                y0: a.y0,
                n_grid: a.grid.n_grid,
                eta: a.grid.eta,
                dist: a.dist,
                format: a.format,
                out: a.out.out,
                ..RunConfig::new(CommandKind::Meantau)
            },
            Command::Survival(a) => RunConfig {
                rho: Some(RhoSpec::Single(a.rho)),
                y0: a.y0,
                n_grid: a.grid.n_grid,
                eta: a.grid.eta,
                dist: a.dist,
                n_max: a.n_max,
                modesum: a.modesum,
                format: a.format,
                out: a.out.out,
                ..RunConfig::new(CommandKind::Survival)
            },
            Command::Spectrum(a) => RunConfig {
                rho: a.rho.spec(),
                y0: a.y0,
                n_grid: a.grid.n_grid,
                eta: a.grid.eta,
                dist: a.dist,
                format: a.format,
                out: a.out.out,
                ..RunConfig::new(CommandKind::Spectrum)
            },
            Command::Fit(a) => {
                let default_range = match a.model {
                    FitKind::Gap => RhoSpec::Range {
                        lo: 20.0,
                        hi: 120.0,
                        step: 10.0,
                    },
                    _ => RhoSpec::Range {
                        lo: 20.0,
                        hi: 200.0,
                        step: 10.0,
                    },
                };
                RunConfig {
                    rho: Some(a.rho_range.unwrap_or(default_range)),
                    y0: match a.model {
                        FitKind::Boundary => 0.0,
                        _ => 0.5,
                    },
                    n_grid: a.grid.n_grid,
                    eta: a.grid.eta,
                    dist: a.dist,
                    model: Some(a.model),
                    format: OutputFormat::Json,
                    out: a.out.out,
                    ..RunConfig::new(CommandKind::Fit)
                }
            }
            Command::Mc(a) => RunConfig {
                rho: Some(RhoSpec::Single(a.rho)),
                y0: a.y0,
                n_grid: a.grid.n_grid,
                eta: a.grid.eta,
                dist: a.dist,
                trials: a.trials,
                seed: a.seed,
                histogram: a.histogram,
                format: OutputFormat::Json,
                out: a.out.out,
                ..RunConfig::new(CommandKind::Mc)
            },
            Command::Figures(a) => RunConfig {
                rho: Some(a.rho_range.unwrap_or(RhoSpec::Range {
                    lo: 20.0,
                    hi: 200.0,
                    step: 10.0,
                })),
                n_grid: a.grid.n_grid,
                eta: a.grid.eta,
                out: Some(a.out),
                ..RunConfig::new(CommandKind::Figures)
            },
        }
    }
}
