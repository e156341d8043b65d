//! Command-line driver: argument parsing, run configuration and the five
//! subcommands. `main.rs` only maps the result onto a process exit code.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use c4bench_core::noise::NoiseParams;
use c4bench_core::sim::Backend;

pub mod aim;
pub mod dump;
pub mod ftcheck;
pub mod gottesman;
pub mod tomo;

pub use aim::{cmd_aim, AimArgs};
pub use dump::{cmd_dump_circuit, DumpArgs};
pub use ftcheck::{cmd_ftcheck, FtcheckArgs};
pub use gottesman::{cmd_gottesman, GottesmanArgs};
pub use tomo::{cmd_tomo, TomoArgs};

/// Significant digits for every number written to CSV.
pub const CSV_DIGITS: usize = 9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "c4bench", version, about = "Simulated benchmarks for a [[4,2,2]] code on neutral atoms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Logical vs physical TVD over the benchmarking corpus.
    Gottesman(GottesmanArgs),
    /// Impurity-model ground-state energies on the parameter grid.
    Aim(AimArgs),
    /// Synthetic Bell tomography, reconstruction and fidelities.
    Tomo(TomoArgs),
    /// Exhaustive single-fault sweep over the encoded constructions.
    Ftcheck(FtcheckArgs),
    /// Print a compiled native circuit.
    DumpCircuit(DumpArgs),
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Gottesman(a) => cmd_gottesman(a),
        Command::Aim(a) => cmd_aim(a),
        Command::Tomo(a) => cmd_tomo(a),
        Command::Ftcheck(a) => cmd_ftcheck(a),
        Command::DumpCircuit(a) => cmd_dump_circuit(a),
    }
}

/// A bad flag, file or parameter value; exits with code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Exit code for an error returned by [`run`].
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        EXIT_INVALID_CONFIG
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Trajectory,
    #[default]
    Auto,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Trajectory => Backend::Trajectory,
            BackendArg::Auto => Backend::Auto,
        }
    }
}

/// Flags shared by the sampling subcommands.
#[derive(Clone, Debug, Default, Args)]
pub struct CommonArgs {
    /// Noise parameters as JSON; defaults to the calibrated model.
    #[arg(long, value_name = "FILE")]
    pub noise: Option<PathBuf>,
    /// Override one noise parameter, e.g. `gr_overrotation=0.0086` or
    /// `rz_transition_matrix.4.1=0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    pub backend: BackendArg,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Resolved settings for one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub noise: NoiseParams,
    pub seed: Option<u64>,
    pub shots: Option<usize>,
    pub backend: Backend,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<RunConfig> {
        let base = match &args.noise {
            Some(path) => {
                let text = read_input(path)?;
                NoiseParams::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?
            }
            None => NoiseParams::default(),
        };
        let overrides = parse_overrides(&args.set)?;
        let noise = base.scaled(&overrides).map_err(|e| config_error(e.to_string()))?;
        if args.shots == Some(0) {
            return Err(config_error("--shots must be positive"));
        }
        Ok(RunConfig { noise, seed: args.seed, shots: args.shots, backend: args.backend.into(), out: args.out.clone() })
    }

    /// Seed for a sampled run; sampling without one is a configuration error.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| config_error("--seed is required for sampled runs"))
    }
}

pub fn parse_overrides(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| config_error(format!("--set expects KEY=VALUE, got `{item}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| config_error(format!("--set {key}: `{value}` is not a number")))?;
        out.insert(key.trim().to_string(), value);
    }
    Ok(out)
}

pub(crate) fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))
}

pub(crate) fn fmt_num(x: f64) -> String {
    c4bench_core::format::sig(x, CSV_DIGITS)
}

/// Renders rows as CSV with the given header.
pub(crate) fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    Ok(String::from_utf8(bytes)?)
}

/// Writes `text` to `out`, or stdout when no path is given.
pub(crate) fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
