//! Command-line front end: `classic`, `solve`, `simulate`, `sweep` and
//! `diagnose`.
//!
//! Errors are reported on one line as `error[<kind>]: <message>` with kind
//! `domain`, `contract`, `usage` or `io`. Exit codes: 0 success, 1 domain or
//! contract error, 2 usage error, 3 I/O error, 4 censored trajectories
//! under `--strict`.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error as ThisError;

pub use commands::{
    cmd_classic, cmd_diagnose, cmd_simulate, cmd_solve, cmd_sweep, describe_spec, render_classic,
    render_diagnose, render_lln_csv, render_simulation, render_solve, render_summary_text,
    render_sweep, sweep_grid, ClassicReport, ClassicRow, DiagnoseReport, SimulateOutcome,
    SimulationSummary, SweepRow, LLN_HEADER, MAX_BLOCK_SPAN, SWEEP_HEADER,
};
pub use config::{
    ConfigFile, ExperimentConfig, OneOrMany, OutputFormat, DEFAULT_CONFIDENCE, DEFAULT_HORIZON,
    DEFAULT_TRAJECTORIES,
};
pub use output::{format_f64, RecordRow, RECORD_HEADER};

use crate::distributions::DistributionSpec;
use crate::engines::DEFAULT_CAP;
use crate::error::Error;
use crate::model::ProcessSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CENSORED: i32 = 4;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn from_csv(e: csv::Error) -> Self {
        CliError::io(Path::new("<csv>"), e.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(Error::Parse(_)) | CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "usage" => EXIT_USAGE,
            "io" => EXIT_IO,
            _ => EXIT_ERROR,
        }
    }

    /// Single line `error[<kind>]: <message>`.
    pub fn report_line(&self) -> String {
        let message = match self {
            CliError::Core(Error::Domain(m) | Error::Contract(m) | Error::Parse(m)) => m.clone(),
            other => other.to_string(),
        };
        format!("error[{}]: {}", self.kind(), message.replace('\n', " "))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rubber-rope",
    version,
    about = "Ant on a stretching rubber rope: simulation, exact solving and diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Progress of a 1 cm/s ant on a 1 km rope stretched by 1 km every second
    Classic(ClassicArgs),
    /// Hitting time for constant step and stretch
    Solve(SolveArgs),
    /// Batch of random trajectories with records and summary
    Simulate(SimulateArgs),
    /// One batch per point of a grid over l0, step and stretch laws
    Sweep(SweepArgs),
    /// Running means, block length and blockwise lower bound on realized draws
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ClassicArgs {
    /// Seconds at which to report the fraction (comma separated)
    #[arg(long = "m", value_delimiter = ',', default_values_t = [1u64, 2, 3, 10, 100])]
    pub m: Vec<u64>,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Initial rope length
    #[arg(long)]
    pub l0: f64,
    /// Constant step: a number or `constant:c=<v>`
    #[arg(long)]
    pub step: String,
    /// Constant stretch: a number or `constant:c=<v>`
    #[arg(long)]
    pub stretch: String,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

/// Flags shared by the batch commands.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trajectories
    #[arg(long)]
    pub n: Option<u64>,
    /// Censoring cap in seconds
    #[arg(long)]
    pub cap: Option<u64>,
    /// Last index of the survival curve (at most the cap)
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Output file (standard output if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Exit with status 4 if any trajectory is censored
    #[arg(long)]
    pub strict: bool,
    /// Worker threads (output does not depend on it)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Allow laws with infinite mean
    #[arg(long)]
    pub explore: bool,
    /// Confidence level of the mean interval
    #[arg(long)]
    pub confidence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Initial rope length
    #[arg(long)]
    pub l0: Option<f64>,
    /// Step law, e.g. `exponential:mean=1.0`
    #[arg(long)]
    pub step: Option<String>,
    /// Stretch law, e.g. `uniform:a=0.5,b=1.5`
    #[arg(long)]
    pub stretch: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the summary as JSON to this file
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Initial lengths (comma separated or repeated)
    #[arg(long, value_delimiter = ',')]
    pub l0: Vec<f64>,
    /// Step laws (repeat the flag for several)
    #[arg(long)]
    pub step: Vec<String>,
    /// Stretch laws (repeat the flag for several)
    #[arg(long)]
    pub stretch: Vec<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub process: ProcessArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Tolerance for the running means
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of blocks m
    #[arg(long)]
    pub blocks: Option<u64>,
    /// Draws used for running means and block length selection
    #[arg(long)]
    pub samples: Option<usize>,
}

pub const DEFAULT_BLOCKS: u64 = 10;
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Errors go to `stderr` as one line.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let first = text.lines().next().unwrap_or_default();
                let first = first.strip_prefix("error: ").unwrap_or(first);
                let _ = writeln!(stderr, "error[usage]: {first}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.report_line());
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Classic(a) => {
            let report = cmd_classic(&a.m)?;
            let bytes = match a.format {
                TextFormat::Text => render_classic(&report).into_bytes(),
                TextFormat::Json => output::to_json(&report)?,
            };
            output::emit(None, &bytes, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Solve(a) => {
            let x = constant_value(&a.step, "step")?;
            let l = constant_value(&a.stretch, "stretch")?;
            let report = cmd_solve(a.l0, x, l)?;
            let bytes = match a.format {
                TextFormat::Text => render_solve(&report).into_bytes(),
                TextFormat::Json => output::to_json(&report)?,
            };
            output::emit(None, &bytes, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Simulate(a) => {
            let file = load_config(&a.common)?;
            let spec = resolve_spec(&a.process, &a.common, &file)?;
            let config = resolve_experiment(spec, &a.common, &file)?;
            let outcome = cmd_simulate(&config)?;
            let bytes = render_simulation(&outcome, config.output_format)?;
            output::emit(config.output_path.as_deref(), &bytes, stdout)?;
            if let Some(path) = a.summary.as_ref().or(file.summary.as_ref()) {
                output::emit(Some(path), &output::to_json(&outcome.summary)?, stdout)?;
            }
            let _ = write!(stderr, "{}", render_summary_text(&outcome.summary));
            let strict = a.common.strict || file.strict.unwrap_or(false);
            Ok(if strict && outcome.summary.n_censored > 0 {
                EXIT_CENSORED
            } else {
                EXIT_OK
            })
        }
        Command::Sweep(a) => {
            let file = load_config(&a.common)?;
            let explore = a.common.explore || file.explore.unwrap_or(false);
            let l0s = pick_list(a.l0, &file.l0, "l0")?;
            let steps = parse_laws(pick_list(a.step, &file.step, "step")?)?;
            let stretches = parse_laws(pick_list(a.stretch, &file.stretch, "stretch")?)?;
            let grid = sweep_grid(&l0s, &steps, &stretches, explore)?;
            let config = resolve_experiment(grid[0], &a.common, &file)?;
            let rows = cmd_sweep(&grid, &config)?;
            let bytes = render_sweep(&rows, config.output_format)?;
            output::emit(config.output_path.as_deref(), &bytes, stdout)?;
            let censored: u64 = rows.iter().map(|r| r.n_censored).sum();
            if censored > 0 {
                let _ = writeln!(
                    stderr,
                    "warning: {censored} trajectories censored across the grid"
                );
            }
            let strict = a.common.strict || file.strict.unwrap_or(false);
            Ok(if strict && censored > 0 {
                EXIT_CENSORED
            } else {
                EXIT_OK
            })
        }
        Command::Diagnose(a) => {
            let file = load_config(&a.common)?;
            let spec = resolve_spec(&a.process, &a.common, &file)?;
            let config = resolve_experiment(spec, &a.common, &file)?;
            let epsilon = a
                .epsilon
                .or(file.epsilon)
                .ok_or_else(|| CliError::Usage("--epsilon is required".into()))?;
            let blocks = a.blocks.or(file.blocks).unwrap_or(DEFAULT_BLOCKS);
            let samples = a.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
            let report = cmd_diagnose(&config, epsilon, blocks, samples)?;
            if let Some(path) = &config.output_path {
                let bytes = match config.output_format {
                    OutputFormat::Csv => render_lln_csv(&report)?,
                    OutputFormat::Json => output::to_json(&report)?,
                };
                output::emit(Some(path), &bytes, stdout)?;
            }
            output::emit(None, render_diagnose(&report).as_bytes(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<ConfigFile, CliError> {
    match &common.config {
        Some(path) => ConfigFile::load(path),
        None => Ok(ConfigFile::default()),
    }
}

fn pick_list<T: Clone>(
    flags: Vec<T>,
    file: &Option<OneOrMany<T>>,
    key: &str,
) -> Result<Vec<T>, CliError> {
    if !flags.is_empty() {
        return Ok(flags);
    }
    match file {
        Some(v) => Ok(v.to_vec()),
        None => Err(CliError::Usage(format!("--{key} is required"))),
    }
}

fn parse_laws(texts: Vec<String>) -> Result<Vec<DistributionSpec>, CliError> {
    texts
        .iter()
        .map(|t| t.parse().map_err(CliError::from))
        .collect()
}

fn resolve_spec(
    process: &ProcessArgs,
    common: &CommonArgs,
    file: &ConfigFile,
) -> Result<ProcessSpec, CliError> {
    let l0 = match process.l0 {
        Some(v) => v,
        None => ConfigFile::single(&file.l0, "l0")?
            .ok_or_else(|| CliError::Usage("--l0 is required".into()))?,
    };
    let law = |flag: &Option<String>, from_file: &Option<OneOrMany<String>>, key: &str| {
        let text = match flag {
            Some(t) => t.clone(),
            None => ConfigFile::single(from_file, key)?
                .ok_or_else(|| CliError::Usage(format!("--{key} is required")))?,
        };
        text.parse::<DistributionSpec>().map_err(CliError::from)
    };
    let step = law(&process.step, &file.step, "step")?;
    let stretch = law(&process.stretch, &file.stretch, "stretch")?;
    let spec = if common.explore || file.explore.unwrap_or(false) {
        ProcessSpec::exploratory(l0, step, stretch)?
    } else {
        ProcessSpec::new(l0, step, stretch)?
    };
    Ok(spec)
}

fn resolve_experiment(
    spec: ProcessSpec,
    common: &CommonArgs,
    file: &ConfigFile,
) -> Result<ExperimentConfig, CliError> {
    let cap = common.cap.or(file.cap).unwrap_or(DEFAULT_CAP);
    let config = ExperimentConfig {
        spec,
        n_trajectories: common.n.or(file.n).unwrap_or(DEFAULT_TRAJECTORIES),
        master_seed: common.seed.or(file.seed).unwrap_or(0),
        cap,
        horizon: common
            .horizon
            .or(file.horizon)
            .unwrap_or(DEFAULT_HORIZON.min(cap)),
        output_path: common.out.clone().or_else(|| file.out.clone()),
        output_format: common.format.or(file.format).unwrap_or_default(),
        parallelism: match common.threads.or(file.threads) {
            Some(t) => t,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
        confidence: common
            .confidence
            .or(file.confidence)
            .unwrap_or(DEFAULT_CONFIDENCE),
    };
    config.validate()?;
    Ok(config)
}

/// A plain number, or a law that is constant.
fn constant_value(text: &str, name: &str) -> Result<f64, CliError> {
    if let Ok(v) = text.trim().parse::<f64>() {
        return Ok(v);
    }
    match text.parse::<DistributionSpec>()? {
        DistributionSpec::Constant { c } => Ok(c),
        other => Err(CliError::Usage(format!(
            "solve needs a constant {name}, got {other}"
        ))),
    }
}
