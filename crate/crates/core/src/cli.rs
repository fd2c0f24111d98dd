//! The `cvbridge` command line.
//!
//! Every subcommand renders its whole output in memory first, then writes it
//! to stdout or, with `--out`, to a temporary file in the target directory
//! that is renamed into place. A failing run never leaves a partial file.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{self, ConfigDocument, ConfigError};
use crate::criteria::JointCombination;
use crate::error::Error;
use crate::mc;
use crate::report::{self, ReportDocument};
use crate::scenario::{self, Arm, Source, MODE_1550, MODE_532};
use crate::spectral::{self, Landmarks};
use crate::trace::{Grid, TraceSeries};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_IO: i32 = 4;

const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  1  internal error
  2  configuration, usage or parameter-range error
  3  infeasible request (e.g. calibration landmarks out of reach)
  4  I/O error (unreadable config, unwritable output)";

const DEFAULT_SWEEP: (f64, f64, usize) = (0.0, 40.0, 161);
const DEFAULT_SCAN: (f64, f64, usize) = (0.0, std::f64::consts::TAU, 361);

#[derive(Debug, Parser)]
#[command(name = "cvbridge", version, about = "Gaussian model of an up-conversion entanglement experiment", after_help = EXIT_CODES_HELP)]
pub struct Cli {
    /// Scenario config file; the built-in reference experiment when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScannedArm {
    #[value(name = "532")]
    Nm532,
    #[value(name = "1550")]
    Nm1550,
}

impl From<ScannedArm> for Arm {
    fn from(a: ScannedArm) -> Self {
        match a {
            ScannedArm::Nm532 => Arm::Nm532,
            ScannedArm::Nm1550 => Arm::Nm1550,
        }
    }
}

/// Overrides for the grid taken from the config's `[analysis]` section.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct GridOverride {
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

impl GridOverride {
    fn apply(&self, base: Grid) -> Result<Grid, CliError> {
        Ok(Grid::new(
            self.start.unwrap_or(base.start),
            self.stop.unwrap_or(base.stop),
            self.points.unwrap_or(base.points),
        )?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Duan quantity and points A to D at the configured operating point.
    Evaluate,
    /// Summed-quadrature noise while one detector phase is swept.
    PhaseScan {
        /// Detector whose phase is scanned.
        #[arg(long, value_enum, default_value_t = ScannedArm::Nm532)]
        scanned: ScannedArm,
        #[command(flatten)]
        grid: GridOverride,
    },
    /// X-sum and P-difference noise against sideband frequency (MHz).
    Spectrum {
        #[command(flatten)]
        grid: GridOverride,
    },
    /// Beam splitter setting that minimises the Duan quantity.
    Optimize,
    /// Fits the cavity source to two spectral landmarks.
    Calibrate {
        #[arg(long, default_value_t = -5.5, allow_negative_numbers = true)]
        target_db: f64,
        #[arg(long, default_value_t = 5.0)]
        ref_mhz: f64,
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        crossing_db: f64,
        #[arg(long, default_value_t = 20.0)]
        crossing_mhz: f64,
        /// Print the config with the calibrated source instead of a report.
        #[arg(long)]
        emit_config: bool,
    },
    /// Monte-Carlo estimates of the joint variances.
    Sample {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Sample a whole phase scan instead of the operating point.
        #[arg(long)]
        scan: bool,
        #[arg(long, value_enum, default_value_t = ScannedArm::Nm532)]
        scanned: ScannedArm,
        #[command(flatten)]
        grid: GridOverride,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Model(Error::Infeasible(_)) => EXIT_INFEASIBLE,
            CliError::Model(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

fn load_document(path: Option<&Path>) -> Result<ConfigDocument, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Ok(config::parse_document(&text)?)
        }
        None => Ok(config::parse_document(config::EXPERIMENT_DEFAULTS)?),
    }
}

fn grid_or(grid: Option<Grid>, (start, stop, points): (f64, f64, usize)) -> Grid {
    grid.unwrap_or(Grid { start, stop, points })
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn rows_csv(rows: &[(String, String)]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    report::write_rows(rows, &mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

fn render_report(doc: &ReportDocument, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(doc),
        Format::Csv => rows_csv(&doc.rows()),
    }
}

fn render_trace(trace: &TraceSeries, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => json(trace),
        Format::Csv => Ok(trace.to_csv_string()),
    }
}

/// Runs one parsed invocation and returns the rendered output.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    let doc = load_document(cli.config.as_deref())?;
    let cfg = doc.scenario;
    match &cli.command {
        Command::Evaluate => {
            let op = scenario::evaluate(&cfg)?;
            render_report(&ReportDocument::new(cfg, op), cli.format)
        }
        Command::PhaseScan { scanned, grid } => {
            let grid = grid.apply(grid_or(doc.scan, DEFAULT_SCAN))?;
            render_trace(&scenario::phase_scan(&cfg, &grid, (*scanned).into())?, cli.format)
        }
        Command::Spectrum { grid } => {
            let grid = grid.apply(grid_or(doc.sweep, DEFAULT_SWEEP))?;
            render_trace(&spectral::spectrum_sweep(&cfg, &grid)?, cli.format)
        }
        Command::Optimize => {
            let outcome = scenario::optimize_vbs(&cfg)?;
            let mut report = ReportDocument::new(cfg, outcome.point);
            report.optimization = Some(outcome);
            render_report(&report, cli.format)
        }
        Command::Calibrate {
            target_db,
            ref_mhz,
            crossing_db,
            crossing_mhz,
            emit_config,
        } => {
            let landmarks = Landmarks {
                target_db: *target_db,
                ref_mhz: *ref_mhz,
                crossing_db: *crossing_db,
                crossing_mhz: *crossing_mhz,
            };
            let cal = spectral::calibrate_to_landmarks(&landmarks, &cfg)?;
            if *emit_config {
                let mut out = doc;
                out.scenario.source = Source::Spectrum(cal.model);
                return Ok(config::serialize(&out));
            }
            match cli.format {
                Format::Json => json(&cal),
                Format::Csv => rows_csv(&report::calibration_rows(&cal)),
            }
        }
        Command::Sample {
            seed,
            samples,
            scan,
            scanned,
            grid,
        } => {
            if *scan {
                let grid = grid.apply(grid_or(doc.scan, DEFAULT_SCAN))?;
                let trace = mc::scan_with_noise(&cfg, &grid, (*scanned).into(), *samples, *seed)?;
                return render_trace(&trace, cli.format);
            }
            let op = scenario::evaluate(&cfg)?;
            let state = scenario::build_state(&cfg.resolved()?)?;
            let combos = [
                JointCombination::x_sum(MODE_1550, MODE_532),
                JointCombination::p_diff(MODE_1550, MODE_532),
            ];
            let mut report = ReportDocument::new(cfg, op);
            report.sample_runs = mc::estimate_joint_variances(&state, &combos, *samples, *seed)?;
            report.provenance.seed = Some(*seed);
            report.provenance.samples = Some(*samples as u64);
            render_report(&report, cli.format)
        }
    }
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = render(cli)?;
    match &cli.out {
        Some(path) => write_atomic(path, &text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let tag = match &e {
                CliError::Config(c) => c.code(),
                CliError::Model(Error::Infeasible(_)) => "infeasible",
                CliError::Model(_) => "range",
                CliError::Io { .. } => "io",
                CliError::Internal(_) => "internal",
            };
            eprintln!("cvbridge: error[{tag}]: {e}");
            e.exit_code()
        }
    }
}
