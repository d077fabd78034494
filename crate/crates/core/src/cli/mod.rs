//! The `lztimes` command-line front end.
//!
//! Every command resolves flags and an optional TOML config file into a
//! [`RunSpec`], renders its output fully in memory and only then writes it,
//! so a failing run leaves no partial file behind.

mod commands;
pub mod output;
pub mod validate;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, IntegratorConfig, MeasureError};
use crate::model::{Basis, ModelError};
use crate::times::{Epsilon, TimesError, DEFAULT_EPSILON};

pub use commands::{figure_bundle, times_rows, trace_rows, FigureFile, TimesOutRow, TraceRow};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Times(#[from] TimesError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{failed} of {total} validation checks failed")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BasisSelection {
    D,
    A,
    Both,
}

impl BasisSelection {
    pub fn bases(self) -> &'static [Basis] {
        match self {
            BasisSelection::D => &[Basis::Diabatic],
            BasisSelection::A => &[Basis::Adiabatic],
            BasisSelection::Both => &[Basis::Diabatic, Basis::Adiabatic],
        }
    }
}

impl fmt::Display for BasisSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisSelection::D => "d",
            BasisSelection::A => "a",
            BasisSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Trace,
    Times,
    Figures,
    Validate,
}

#[derive(Debug, Parser)]
#[command(
    name = "lztimes",
    version,
    about = "Landau-Zener transition probabilities and transition times"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArg,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CommandArg {
    /// Probability traces P(τ) from the inversion equations next to the closed forms
    Trace,
    /// Closed-form jump and relaxation times on an ω grid
    Times,
    /// Preset bundle of traces and time tables, written into the --out directory
    Figures,
    /// Cross-checks of numerics against closed forms; exit status 0 iff all pass
    Validate,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Trace => Command::Trace,
            CommandArg::Times => Command::Times,
            CommandArg::Figures => Command::Figures,
            CommandArg::Validate => Command::Validate,
        }
    }
}

/// Flags shared by all commands. Each one overrides the config-file key of
/// the same name (with `-` replaced by `_`).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Options {
    /// Coupling ω = Ω/β; repeat or separate by commas for several values
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub omega: Vec<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    /// Number of equally spaced ω values between --omega-min and --omega-max
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub basis: Option<BasisSelection>,
    /// Relative level ε defining the transition times
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau_step: Option<f64>,
    /// Read the τ range in units of ω (the τ/ω abscissa)
    #[arg(long, global = true)]
    pub tau_over_omega: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub abs_tol: Option<f64>,
    /// Multiplies every validation limit
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tolerance_scale: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (a directory for `figures`); standard output if omitted
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat TOML file with the same keys as the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    omega: Option<OneOrMany>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points: Option<usize>,
    basis: Option<BasisSelection>,
    epsilon: Option<f64>,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    tau_step: Option<f64>,
    tau_over_omega: Option<bool>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    tolerance_scale: Option<f64>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
    /// min/max/step are in units of ω.
    pub over_omega: bool,
}

impl TauRange {
    pub const DEFAULT: TauRange = TauRange {
        min: -10.0,
        max: 30.0,
        step: 0.02,
        over_omega: false,
    };
    pub const DEFAULT_OVER_OMEGA: TauRange = TauRange {
        min: -5.0,
        max: 10.0,
        step: 0.01,
        over_omega: true,
    };

    /// The τ grid for one coupling.
    pub fn grid(&self, omega: f64) -> Vec<f64> {
        let g = crate::engine::uniform_grid(self.min, self.max, self.step);
        if self.over_omega {
            g.into_iter().map(|x| x * omega).collect()
        } else {
            g
        }
    }
}

/// A fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub omegas: Vec<f64>,
    pub basis: BasisSelection,
    pub epsilon: Epsilon,
    pub tau: TauRange,
    pub integrator: IntegratorConfig,
    pub tolerance_scale: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_TIMES_GRID: (f64, f64, usize) = (0.03, 10.0, 60);

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    _ if i + 1 == n => hi,
                    _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunSpec {
    /// Merges flags over the config file and validates the result.
    pub fn resolve(command: Command, opts: &Options) -> Result<Self, CliError> {
        let file = match &opts.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };

        let omega_list = if !opts.omega.is_empty() {
            Some(opts.omega.clone())
        } else {
            file.omega.map(|o| match o {
                OneOrMany::One(w) => vec![w],
                OneOrMany::Many(v) => v,
            })
        };
        let omega_min = opts.omega_min.or(file.omega_min);
        let omega_max = opts.omega_max.or(file.omega_max);
        let points = opts.points.or(file.points);

        let omegas = match (omega_list, omega_min, omega_max) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                return Err(usage(
                    "give either --omega or --omega-min/--omega-max, not both",
                ))
            }
            (Some(list), None, None) => list,
            (None, Some(lo), Some(hi)) => {
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(usage(format!("empty omega range [{lo}, {hi}]")));
                }
                let n = points.unwrap_or(if lo == hi { 1 } else { 20 });
                if n == 0 {
                    return Err(usage("--points must be at least 1"));
                }
                linear_grid(lo, hi, n)
            }
            (None, Some(_), None) | (None, None, Some(_)) => {
                return Err(usage("--omega-min and --omega-max must be given together"))
            }
            (None, None, None) => match command {
                Command::Trace => {
                    return Err(usage("trace needs --omega or --omega-min/--omega-max"))
                }
                Command::Times => {
                    let (lo, hi, n) = DEFAULT_TIMES_GRID;
                    log_grid(lo, hi, points.unwrap_or(n))
                }
                Command::Figures | Command::Validate => Vec::new(),
            },
        };
        if matches!(command, Command::Trace | Command::Times) && omegas.is_empty() {
            return Err(usage("empty omega grid"));
        }
        if let Some(&w) = omegas.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(usage(format!("omega must be positive and finite, got {w}")));
        }

        let epsilon = Epsilon::new(opts.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON))
            .map_err(|e| usage(e.to_string()))?;

        let over_omega = opts.tau_over_omega || file.tau_over_omega.unwrap_or(false);
        let base = if over_omega {
            TauRange::DEFAULT_OVER_OMEGA
        } else {
            TauRange::DEFAULT
        };
        let tau = TauRange {
            min: opts.tau_min.or(file.tau_min).unwrap_or(base.min),
            max: opts.tau_max.or(file.tau_max).unwrap_or(base.max),
            step: opts.tau_step.or(file.tau_step).unwrap_or(base.step),
            over_omega,
        };
        if !(tau.min.is_finite() && tau.max.is_finite() && tau.min <= tau.max) {
            return Err(usage(format!("empty tau range [{}, {}]", tau.min, tau.max)));
        }
        if !(tau.step.is_finite() && tau.step > 0.0) {
            return Err(usage(format!(
                "tau step must be positive, got {}",
                tau.step
            )));
        }

        let defaults = IntegratorConfig::default();
        let integrator = IntegratorConfig::with_tolerances(
            opts.rel_tol.or(file.rel_tol).unwrap_or(defaults.rel_tol),
            opts.abs_tol.or(file.abs_tol).unwrap_or(defaults.abs_tol),
        );
        integrator.validate().map_err(|e| usage(e.to_string()))?;

        let tolerance_scale = opts.tolerance_scale.or(file.tolerance_scale).unwrap_or(1.0);
        if !(tolerance_scale.is_finite() && tolerance_scale > 0.0) {
            return Err(usage(format!(
                "tolerance_scale must be positive, got {tolerance_scale}"
            )));
        }

        Ok(RunSpec {
            command,
            omegas,
            basis: opts.basis.or(file.basis).unwrap_or(BasisSelection::Both),
            epsilon,
            tau,
            integrator,
            tolerance_scale,
            format: opts.format.or(file.format).unwrap_or_default(),
            out: opts.out.clone().or(file.out),
        })
    }

    /// Metadata echoed into every CSV file. Excludes the output path so that
    /// files written to different places compare equal.
    pub fn echo(&self, what: &str) -> String {
        format!(
            "lztimes {} schema={} {what} omega={:?} basis={} epsilon={:?} \
             tau=[{:?},{:?}] tau_step={:?} tau_over_omega={} rel_tol={:?} abs_tol={:?}",
            env!("CARGO_PKG_VERSION"),
            output::SCHEMA_VERSION,
            self.omegas,
            self.basis,
            self.epsilon.value(),
            self.tau.min,
            self.tau.max,
            self.tau.step,
            self.tau.over_omega,
            self.integrator.rel_tol,
            self.integrator.abs_tol,
        )
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit(spec: &RunSpec, contents: &str) -> Result<(), CliError> {
    match &spec.out {
        Some(path) => write_file(path, contents),
        None => std::io::stdout()
            .lock()
            .write_all(contents.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

pub fn execute(spec: &RunSpec) -> Result<(), CliError> {
    match spec.command {
        Command::Trace => {
            let rows = trace_rows(spec)?;
            emit(
                spec,
                &output::render(&rows, &spec.echo("command=trace"), spec.format),
            )
        }
        Command::Times => {
            let rows = times_rows(spec)?;
            emit(
                spec,
                &output::render(&rows, &spec.echo("command=times"), spec.format),
            )
        }
        Command::Figures => {
            let dir = spec.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let files = figure_bundle(spec)?;
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            for f in &files {
                write_file(&dir.join(&f.name), &f.contents)?;
            }
            Ok(())
        }
        Command::Validate => {
            let report = validate::run_checks(spec);
            let rendered = output::render(&report, &spec.echo("command=validate"), spec.format);
            emit(spec, &rendered)?;
            let failed = report.iter().filter(|c| !c.passed).count();
            if failed == 0 {
                Ok(())
            } else {
                Err(CliError::ValidationFailed {
                    failed,
                    total: report.len(),
                })
            }
        }
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = RunSpec::resolve(cli.command.into(), &cli.options).and_then(|spec| execute(&spec));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lztimes: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
