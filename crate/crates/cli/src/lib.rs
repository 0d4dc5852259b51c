//! Command-line front end for canal hypersurfaces in Minkowski space-time.
//!
//! [`run`] parses arguments, loads the JSON job, dispatches to a command and
//! returns the process exit code.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Slice;
use crate::config::{ConfigError, Tolerances};

/// Exit status on success.
pub const EXIT_OK: u8 = 0;
/// Exit status when verification finds a residual above tolerance.
pub const EXIT_VERIFY: u8 = 1;
/// Exit status for configuration and I/O problems.
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "canal4d", version, about = "Canal hypersurfaces in Minkowski space-time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// JSON job description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; defaults to the config's output path, then stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point grid as CSV.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form and numerical curvatures per grid node as CSV.
    Curvature {
        #[command(flatten)]
        common: Common,
        /// Skip the numerical engine.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Residual report; exits 1 if any class exceeds its tolerance.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        no_oracle: bool,
        /// Run the builtin battery instead of a configured job.
        #[arg(long)]
        all_types: bool,
        /// Replace every tolerance by this value.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Worker threads for the builtin battery.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Triangle mesh of a 2-parameter slice, projected to three dimensions.
    ExportObj {
        #[command(flatten)]
        common: Common,
        /// Fixed parameter, for example `w=0`.
        #[arg(long)]
        slice: Slice,
    },
}

fn load(common: &Common) -> Result<config::Job, ConfigError> {
    let path = common.config.as_ref().ok_or_else(|| ConfigError::new("", "--config <path> is required"))?;
    config::load(path)?.build()
}

fn emit(text: &str, common: &Common, job: Option<&config::Job>) -> Result<(), ConfigError> {
    let path = common.out.clone().or_else(|| job.and_then(|j| j.config.output.path.clone()));
    let res = match &path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| match path {
        Some(p) => ConfigError::new("", format!("cannot write {}: {e}", p.display())),
        None => ConfigError::new("", format!("cannot write to stdout: {e}")),
    })
}

fn tolerances(base: Tolerances, over: Option<f64>) -> Result<Tolerances, ConfigError> {
    match over {
        Some(t) if !(t.is_finite() && t > 0.0) => Err(ConfigError::new("--tolerance", format!("{t} is not positive"))),
        Some(t) => Ok(Tolerances::uniform(t)),
        None => Ok(base),
    }
}

fn execute(cli: Cli) -> Result<u8, ConfigError> {
    match cli.command {
        Command::Generate { common } => {
            let job = load(&common)?;
            emit(&commands::generate(&job)?, &common, Some(&job))?;
        }
        Command::Curvature { common, no_oracle } => {
            let job = load(&common)?;
            emit(&commands::curvature(&job, !no_oracle), &common, Some(&job))?;
        }
        Command::ExportObj { common, slice } => {
            let job = load(&common)?;
            emit(&commands::export_obj(&job, slice)?, &common, Some(&job))?;
        }
        Command::Verify { common, no_oracle, all_types, tolerance, workers, inject_fault } => {
            if workers == Some(0) {
                return Err(ConfigError::new("--workers", "must be at least 1"));
            }
            let (report, job) = if all_types {
                let job = common.config.as_ref().map(|_| load(&common)).transpose()?;
                let base = job.as_ref().map(|j| j.config.tolerances).unwrap_or_default();
                let tol = tolerances(base, tolerance)?;
                (verify::verify_battery(&tol, workers.or(job.as_ref().and_then(|j| j.config.workers)), inject_fault), job)
            } else {
                let job = load(&common)?;
                let tol = tolerances(job.config.tolerances, tolerance)?;
                (verify::verify_job(&job, &tol, !no_oracle, inject_fault), Some(job))
            };
            let mut text = report.render();
            let code = match report.worst() {
                None => {
                    text.push_str("PASS\n");
                    EXIT_OK
                }
                Some(c) => {
                    let at = c.worst.as_ref().map(|o| o.to_string()).unwrap_or_default();
                    text.push_str(&format!("FAIL {} {} (tolerance {})\n", c.class.name(), at, output::num(c.tolerance)));
                    EXIT_VERIFY
                }
            };
            emit(&text, &common, job.as_ref())?;
            if code == EXIT_VERIFY {
                if let Some(c) = report.worst() {
                    let at = c.worst.as_ref().map(|o| o.to_string()).unwrap_or_default();
                    eprintln!("verification failed: {} {}", c.class.name(), at);
                }
            }
            return Ok(code);
        }
    }
    Ok(EXIT_OK)
}

/// Runs the command line `args` and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
