//! `ostrowski`: batch driver for the approximation, gap and construction experiments.

mod analysis;
mod approx;
mod build;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ostrowski::series::{Mode, DEFAULT_PRECISION};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "ostrowski", version, about = "Windowed approximation, gap analysis and certified block-series constructions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Arithmetic mode; overrides the config.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Float precision in bits (implies float mode unless --mode is given).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Threshold for trend and decay checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Exact,
    Float,
}

impl Global {
    /// Flags first, then the config's mode, then `default`.
    pub fn mode(&self, config: Option<Mode>, default: Mode) -> CliResult<Mode> {
        let base = config.unwrap_or(default);
        let float_bits = |m: Mode| match m {
            Mode::Float { precision } => precision,
            Mode::Exact => DEFAULT_PRECISION,
        };
        let mode = match (self.mode, self.precision) {
            (Some(ModeArg::Exact), Some(_)) => {
                return Err(CliError::Usage("--precision cannot be combined with --mode exact".into()))
            }
            (Some(ModeArg::Exact), None) => Mode::Exact,
            (Some(ModeArg::Float), p) | (None, p @ Some(_)) => Mode::float(p.unwrap_or(float_bits(base))),
            (None, None) => base,
        };
        if let Mode::Float { precision } = mode {
            if !(16..=65536).contains(&precision) {
                return Err(CliError::Usage(format!("precision {precision} outside 16..=65536")));
            }
        }
        Ok(mode)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn require_config(&self, command: &str) -> CliResult<&PathBuf> {
        self.config.as_ref().ok_or_else(|| CliError::Usage(format!("`{command}` needs --config PATH")))
    }

    pub fn tol(&self, default: f64) -> CliResult<f64> {
        match self.tol {
            Some(t) if !(t.is_finite() && t > 0.0) => Err(CliError::Usage(format!("--tol must be positive, got {t}"))),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Windowed minimax sweep over one or more windows.
    Approx(approx::ApproxArgs),
    /// Series in U(D,0) but not in U^(μ)(D,0), with certificate.
    Construct,
    /// Series universal at 0 along μ but not at a center ζ, with certificate.
    Center,
    /// Real-line construction with certificate.
    Real,
    /// Gap detection and transfer checks for a series.
    Gaps,
    /// Successive ratios of a subsequence and their classification.
    Ratios(analysis::RatioArgs),
    /// μ-partial sums of a series at a probe point.
    Probe,
    /// Re-check a certificate file from its serialized data.
    Verify(build::VerifyArgs),
}

fn init_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("OSTROWSKI_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("OSTROWSKI_THREADS must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let g = &cli.global;
    g.mode(None, Mode::float(DEFAULT_PRECISION))?;
    g.tol(1.0)?;
    match cli.command {
        Command::Approx(args) => approx::run(g, &args),
        Command::Construct => build::construct(g),
        Command::Center => build::center(g),
        Command::Real => build::real(g),
        Command::Gaps => analysis::gaps(g),
        Command::Ratios(args) => analysis::ratios(g, &args),
        Command::Probe => analysis::probe(g),
        Command::Verify(args) => build::verify(g, &args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
