//! Command-line driver: reads a JSON experiment, runs one of the solve,
//! bounds, sweep, variational or hybrid pipelines and writes long-format CSV.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{Outcome, SweepParam};
use crate::config::{ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MODULE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "shellbound", version, about = "Bound states of singular surface interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV; overrides output.path in the config. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state of the configured surfaces and points.
    Solve(Common),
    /// Critical-coupling bounds, Geršgorin bounds and finiteness certificates.
    Bounds(Common),
    /// Repeat a computation over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of nu, separation, lambda, radius, deformation_c.
        #[arg(long)]
        param: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        grid: Vec<f64>,
    },
    /// Variational ground state with matrix identities and cross-checks.
    Variational(Common),
    /// Surfaces plus point sources, with the far-point perturbative shift.
    Hybrid(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Bounds(_) => "bounds",
            Command::Sweep { .. } => "sweep",
            Command::Variational(_) => "variational",
            Command::Hybrid(_) => "hybrid",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Solve(c) | Command::Bounds(c) | Command::Variational(c) | Command::Hybrid(c) => c,
            Command::Sweep { common, .. } => common,
        }
    }
}

/// Caps the global rayon pool from `SHELLBOUND_THREADS`.
pub fn configure_threads(var: Option<&str>) -> Result<(), ConfigError> {
    let Some(raw) = var else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError::Invalid(format!("SHELLBOUND_THREADS must be a positive integer, got {raw:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Deterministic identifier of an invocation: config bytes, command and sweep.
pub fn run_id(config_bytes: &[u8], command: &str, sweep: Option<(&str, &[f64])>) -> String {
    let mut key = config_bytes.to_vec();
    key.push(0);
    key.extend_from_slice(command.as_bytes());
    if let Some((param, grid)) = sweep {
        key.push(0);
        key.extend_from_slice(param.as_bytes());
        for g in grid {
            key.extend_from_slice(&g.to_bits().to_le_bytes());
        }
    }
    output::sha256_hex(&key)[..16].to_string()
}

/// Runs one command on a parsed config.
pub fn execute(command: &Command, cfg: &ExperimentConfig) -> Result<Outcome, ConfigError> {
    match command {
        Command::Solve(_) => commands::cmd_solve(cfg),
        Command::Bounds(_) => commands::cmd_bounds(cfg),
        Command::Sweep { param, grid, .. } => commands::cmd_sweep(cfg, SweepParam::parse(param)?, grid),
        Command::Variational(_) => commands::cmd_variational(cfg),
        Command::Hybrid(_) => commands::cmd_hybrid(cfg),
    }
}

fn output_path(common: &Common, cfg: &ExperimentConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| cfg.output.as_ref().and_then(|o| o.path.as_ref()).map(PathBuf::from))
}

fn write_output(path: Option<&Path>, bytes: &[u8], id: &str, command: &str, out: &Outcome) -> std::io::Result<()> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            output::write_csv(&mut buf, bytes, id, command, &out.rows.rows)?;
            std::fs::write(p, buf)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            output::write_csv(&mut lock, bytes, id, command, &out.rows.rows)?;
            lock.flush()
        }
    }
}

/// Full CLI flow; returns the process exit status.
pub fn run(cli: &Cli, threads: Option<&str>, stderr: &mut dyn Write) -> i32 {
    let started = std::time::Instant::now();
    if let Err(e) = configure_threads(threads) {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    let common = cli.command.common();
    let (cfg, bytes) = match ExperimentConfig::load(&common.config) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let name = cli.command.name();
    let outcome = match execute(&cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let sweep = match &cli.command {
        Command::Sweep { param, grid, .. } => Some((param.as_str(), grid.as_slice())),
        _ => None,
    };
    let id = run_id(&bytes, name, sweep);
    if let Err(e) = write_output(output_path(common, &cfg).as_deref(), &bytes, &id, name, &outcome) {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_CONFIG;
    }
    for m in &outcome.messages {
        let _ = writeln!(stderr, "{m}");
    }
    let failed = outcome.rows.any_failure();
    let _ = writeln!(stderr, "{name}: {} rows, wall_time_s={:.3}", outcome.rows.rows.len(), started.elapsed().as_secs_f64());
    if failed {
        EXIT_MODULE
    } else {
        EXIT_OK
    }
}
