//! The `robustscan` command line: generate corrupted copies of a LiDAR
//! dataset, score segmentation predictions on them, and turn accuracy
//! records into CE/RR tables.

pub mod config;
pub mod corrupt;
pub mod error;
pub mod evaluate;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use robustscan_core::ReportFormat;

pub use config::{load_profile, RunConfig, PROFILE_DIR_ENV};
pub use corrupt::{cmd_corrupt, Manifest};
pub use error::CliError;
pub use evaluate::{cmd_evaluate, EvalConfig};
pub use report::{cmd_report, find_baseline, load_records};

pub const EXIT_OK: i32 = 0;
/// Some frames or inputs failed; the rest of the work was done.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "robustscan", version, about = "LiDAR corruption sets and robustness scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write corrupted copies of a dataset plus a manifest.
    Corrupt(CorruptArgs),
    /// Compute mIoU of predictions on the clean and corrupted sets.
    Evaluate(EvaluateArgs),
    /// Render CE/RR tables from accuracy records.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// semantickitti, kitti, nuscenes or wod
    #[arg(long)]
    dataset: String,
    /// Profile TOML to use instead of the built-in one.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, env = PROFILE_DIR_ENV)]
    profile_dir: Option<PathBuf>,
    /// Override one profile parameter, e.g. `crosstalk.sigma_c=2.0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ProfileArgs {
    fn load(&self) -> Result<robustscan_core::DatasetProfile, CliError> {
        load_profile(
            &self.dataset,
            self.profile.as_deref(),
            self.profile_dir.as_deref(),
            &self.overrides,
        )
    }
}

#[derive(Debug, Args)]
struct CorruptArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma list of corruptions (default: all).
    #[arg(long, value_delimiter = ',')]
    corruptions: Vec<String>,
    /// Comma list of light, moderate, heavy (default: all).
    #[arg(long, value_delimiter = ',')]
    severities: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    profile: ProfileArgs,
    /// Ground-truth root with clean/ and <corruption>/<severity>/ sets.
    #[arg(long)]
    gt: PathBuf,
    /// Prediction root with the same set directories.
    #[arg(long)]
    pred: PathBuf,
    /// Model name stored in the record (default: prediction directory name).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    num_classes: Option<usize>,
    /// Record file to write (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Record files, each holding one record or an array.
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    /// Baseline model name among the records, or a record file.
    #[arg(long)]
    baseline: String,
    /// csv, json or markdown
    #[arg(long, default_value = "markdown")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Corrupt(a) => {
            let cfg = RunConfig {
                profile: a.profile.load()?,
                input: a.input,
                output: a.out,
                corruptions: config::parse_corruptions(&a.corruptions)?,
                severities: config::parse_severities(&a.severities)?,
                seed: a.seed,
                workers: a
                    .workers
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from)),
            };
            let manifest = cmd_corrupt(&cfg)?;
            for f in &manifest.failures {
                let what = match (f.corruption, f.severity) {
                    (Some(k), Some(s)) => format!(" ({k}/{s})"),
                    _ => String::new(),
                };
                eprintln!("failed: {}{what}: {}", f.frame_id, f.error);
            }
            eprintln!(
                "{} outputs written, {} failures",
                manifest.entries.len(),
                manifest.failures.len()
            );
            Ok(manifest.exit_code())
        }
        Command::Evaluate(a) => {
            let model = a.model.unwrap_or_else(|| {
                a.pred
                    .file_name()
                    .map_or_else(|| "model".into(), |n| n.to_string_lossy().into_owned())
            });
            let cfg = EvalConfig {
                profile: a.profile.load()?,
                gt_root: a.gt,
                pred_root: a.pred,
                model,
                num_classes: a.num_classes,
            };
            let record = cmd_evaluate(&cfg)?;
            let mut bytes = serde_json::to_vec_pretty(&record)?;
            bytes.push(b'\n');
            emit(a.out.as_ref(), &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Report(a) => {
            let format: ReportFormat = a.format.parse().map_err(|e| CliError::Config(format!("{e}")))?;
            let mut records = Vec::new();
            for path in &a.records {
                records.extend(load_records(path)?);
            }
            let baseline = find_baseline(&records, &a.baseline)?;
            let bytes = cmd_report(&records, &baseline, format)?;
            emit(a.out.as_ref(), &bytes)?;
            Ok(EXIT_OK)
        }
    }
}
