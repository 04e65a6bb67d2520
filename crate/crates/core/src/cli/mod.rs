//! Command-line front end: configuration files, subcommands and result
//! serialization.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    power_opt, predict, simulate, sweep_table, POWER_SCHEMA, PREDICT_SCHEMA, SIMULATE_SCHEMA, SWEEP_SCHEMA,
};
pub use config::{canonical_json, parse_config, parse_config_str, read_config, FileConfig};
pub use output::{format_number, manifest_path, Cell, Format, RunManifest, Table};

use crate::error::Error;
use crate::montecarlo::{init_thread_pool_from_env, ExperimentConfig, SweepParameter};
use crate::power::AllocationObjective;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_SOLVER: i32 = 5;
pub const EXIT_RUNTIME: i32 = 6;

/// Process exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) => EXIT_PARSE,
        Error::Validation(_) | Error::Domain(_) | Error::LengthMismatch { .. } | Error::NotBinary { .. } => {
            EXIT_VALIDATION
        }
        Error::NotPsd(_)
        | Error::Singular(_)
        | Error::Bracket(_)
        | Error::Unbounded(_)
        | Error::Infeasible(_)
        | Error::Degenerate(_) => EXIT_SOLVER,
        Error::Io(_) => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bro-mimo",
    version,
    about = "Box-relaxation MIMO detection: asymptotic prediction and Monte Carlo simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted. A provenance manifest is
    /// written to `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Estimate the channel as if pilots were noiseless.
    #[arg(long)]
    perfect_csi: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Objective {
    Mse,
    Ber,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Asymptotic MSE and BER of the box-relaxation detector.
    Predict(Common),
    /// Monte Carlo simulation with the asymptotic prediction alongside.
    Simulate(Common),
    /// Data/pilot power split that optimizes the predicted MSE or BER.
    PowerOpt {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "mse")]
        objective: Objective,
        /// Number of grid points on the data power fraction.
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// Monte Carlo simulation over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// One of rho_db, r, alpha, beta.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Predict(_) => "predict",
            Command::Simulate(_) => "simulate",
            Command::PowerOpt { .. } => "power-opt",
            Command::Sweep { .. } => "sweep",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Predict(c) | Command::Simulate(c) => c,
            Command::PowerOpt { common, .. } | Command::Sweep { common, .. } => common,
        }
    }
}

fn load(common: &Common) -> Result<(FileConfig, ExperimentConfig), Error> {
    let mut file = read_config(&common.config)?;
    if common.perfect_csi {
        file.perfect_csi = true;
    }
    let resolved = file.resolve()?;
    Ok((file, resolved))
}

fn execute(command: &Command) -> Result<i32, Error> {
    let started = Utc::now();
    let common = command.common();
    let (file, config) = load(common)?;
    init_thread_pool_from_env()?;

    let mut status = EXIT_OK;
    let table = match command {
        Command::Predict(_) => predict(&config)?,
        Command::Simulate(_) => simulate(&config)?,
        Command::PowerOpt { objective, grid, .. } => {
            let objective = match objective {
                Objective::Mse => AllocationObjective::Mse,
                Objective::Ber => AllocationObjective::Ber,
            };
            power_opt(&config, objective, *grid)?
        }
        Command::Sweep { param, values, .. } => {
            let parameter: SweepParameter = param.parse()?;
            let (table, failures) = sweep_table(&config, parameter, values)?;
            if let Some(first) = failures.first() {
                eprintln!("warning: {} of {} sweep points failed; see the error column", failures.len(), values.len());
                status = exit_code(first);
            }
            table
        }
    };
    let text = table.render(common.format)?;

    match &common.out {
        None => output::write_stdout(&text)?,
        Some(path) => {
            output::write_file(path, &text)?;
            let manifest = RunManifest {
                schema: table.schema.to_string(),
                command: command.name().to_string(),
                config_path: common.config.display().to_string(),
                config_hash: file.canonical_hash(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                started_at: output::timestamp(started),
                finished_at: output::timestamp(Utc::now()),
                output_paths: vec![path.display().to_string()],
            };
            let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
            output::write_file(&manifest_path(path), &json)?;
        }
    }
    Ok(status)
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
