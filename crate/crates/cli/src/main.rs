// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mintime::harness::Rung;
use mintime::mtf::FieldMode;
use mintime::reachset::Scheme;
use mintime::Error;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(Error::InvalidArgument(_) | Error::NotFound(_)) => 2,
            CliError::Lib(Error::Domain(_) | Error::InvalidState(_)) => 3,
            CliError::Lib(Error::NotReachable(_)) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Reachable sets and minimum time functions of planar control problems.
#[derive(Parser)]
#[command(name = "mintime", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a reach tube; writes tube.csv and summary.json.
    Reach(Flags),
    /// Minimum time field on a spatial grid; writes field.csv.
    Mtf(Flags),
    /// Convergence study over a ladder; writes study.csv and fit.csv.
    Study(Flags),
    /// Time-optimal trajectory from --start; writes trajectory.csv.
    Traj(Flags),
    /// Kalman rank, expansion check and stopping index.
    Diag(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// Registered example id.
    #[arg(long)]
    example: Option<String>,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Number of grid directions.
    #[arg(long)]
    nr: Option<usize>,
    /// Outer steps.
    #[arg(long)]
    k: Option<usize>,
    /// Inner steps per outer step.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tf: Option<f64>,
    /// Spatial grid spacing.
    #[arg(long)]
    dx: Option<f64>,
    /// Membership tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// interpolated or discrete.
    #[arg(long)]
    mode: Option<FieldMode>,
    #[arg(long, overrides_with = "no_monotone")]
    monotone: bool,
    #[arg(long)]
    no_monotone: bool,
    /// Stopping threshold for diag.
    #[arg(long)]
    threshold: Option<f64>,
    /// JSON list of rungs, e.g. [{"h": 0.04, "n_r": 50}].
    #[arg(long)]
    ladder: Option<PathBuf>,
    /// Start point "x1,x2" for traj.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    start: Option<[f64; 2]>,
    /// Fit with a fixed order.
    #[arg(long)]
    fixed_p: Option<f64>,
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.trim().parse().map_err(|e| format!("{e}"))?,
            b.trim().parse().map_err(|e| format!("{e}"))?,
        ]),
        _ => Err("expected x1,x2".into()),
    }
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let ladder =
            match &self.ladder {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Config(format!("ladder: cannot read {}: {e}", path.display()))
                    })?;
                    Some(serde_json::from_str::<Vec<Rung>>(&text).map_err(|e| {
                        CliError::Config(format!("ladder: {}: {e}", path.display()))
                    })?)
                }
                None => None,
            };
        let monotone = match (self.monotone, self.no_monotone) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        };
        let grid = self.dx.map(|dx| {
            let mut g = base.grid.unwrap_or_default();
            g.dx = dx;
            g
        });
        Ok(base.merge(RunConfig {
            example: self.example.clone(),
            scheme: self.scheme,
            n_r: self.nr,
            k: self.k,
            n: self.n,
            tf: self.tf,
            grid,
            tol: self.tol,
            monotone,
            mode: self.mode,
            threshold: self.threshold,
            ladder,
            fixed_p: self.fixed_p,
            start: self.start,
            out: self.out.clone(),
            problem: None,
        }))
    }
}

type Handler = fn(&config::Resolved) -> Result<(), CliError>;

fn run(cli: Cli) -> Result<(), CliError> {
    let (flags, cmd): (&Flags, Handler) = match &cli.command {
        Command::Reach(f) => (f, commands::reach),
        Command::Mtf(f) => (f, commands::mtf),
        Command::Study(f) => (f, commands::study),
        Command::Traj(f) => (f, commands::traj),
        Command::Diag(f) => (f, commands::diag),
    };
    let resolved = config::resolve(flags.to_config()?)?;
    cmd(&resolved)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mintime: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
