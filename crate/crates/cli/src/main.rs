//! Command-line front end: config ingestion, pipeline orchestration, and
//! machine-readable reports.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 infeasible target or
//! configuration, 3 synthesis/integration failure, 4 reconstruction or
//! analysis failure.

mod artifacts;
mod config;
mod pipeline;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "fockgen", version, about = "Coherent-state to Fock-superposition protocol toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the source amplitude and solve the drive plan; writes plan.json
    Plan(Common),
    /// Run the protocol and post-select; writes state.json (+ waveform.csv in numeric mode)
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Evolution backend
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Simulate a Wigner measurement and reconstruct the state; writes grid CSVs and report.json
    Tomography {
        #[command(flatten)]
        common: Common,
        /// state.json from a previous simulate run; defaults to the ideal target
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Full pipeline: plan, numeric simulate, tomography
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `outputs`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's measurement seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Analytic,
    Numeric,
}

/// Anything that ends a run unsuccessfully, carrying its exit class.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation, unreadable files, malformed JSON: exit 1.
    Usage(String),
    /// Physically invalid configuration values: exit 2.
    Config(String),
    /// Library failures, classified per variant.
    Lib(fockgen::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Config(msg) => f.write_str(msg),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<fockgen::Error> for Failure {
    fn from(e: fockgen::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        use fockgen::Error::*;
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Lib(e) => match e {
                InfeasibleTarget { .. }
                | DimensionMismatch { .. }
                | InvalidDimension { .. }
                | ZeroNorm
                | OddCutoff { .. }
                | InvalidPhaseIndex { .. }
                | InvalidSqueeze { .. }
                | EmptySearchRange { .. }
                | TruncationError { .. }
                | InvalidGrid { .. } => 2,
                NonpositiveSigma { .. }
                | SampleRateTooLow { .. }
                | AmplitudeCapExceeded { .. }
                | StepTooLarge { .. }
                | ZeroProbability
                | PlanTauMismatch { .. } => 3,
                UnderdeterminedGrid { .. }
                | SingularDesign
                | InvalidR { .. }
                | FitDiverged { .. }
                | TooFewResamples { .. }
                | InvalidDensityMatrix { .. } => 4,
                Malformed { .. } | Io(_) => 1,
            },
        }
    }
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), Failure> {
    let text = fs::read_to_string(&common.config).map_err(|e| {
        Failure::Usage(format!("cannot read config {}: {e}", common.config.display()))
    })?;
    let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| {
        Failure::Usage(format!("invalid config {}: {e}", common.config.display()))
    })?;
    if let Some(seed) = common.seed {
        config.measurement.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.outputs.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|e| {
        Failure::Usage(format!("cannot create output directory {}: {e}", out.display()))
    })?;
    Ok((config, out))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan(common) => {
            let (config, out) = load(&common)?;
            pipeline::plan(&config, &out)?;
        }
        Command::Simulate { common, mode } => {
            let (config, out) = load(&common)?;
            pipeline::simulate(&config, mode, &out)?;
        }
        Command::Tomography { common, state } => {
            let (config, out) = load(&common)?;
            let loaded = match &state {
                Some(path) => Some(artifacts::read_state(path)?),
                None => None,
            };
            pipeline::tomography(&config, loaded.as_ref(), &out)?;
        }
        Command::Report(common) => {
            let (config, out) = load(&common)?;
            pipeline::report(&config, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here too and must exit 0.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
