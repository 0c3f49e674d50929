use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

mod commands;
mod config;
mod model;
mod output;

use commands::{CommandError, Report};
use config::{ConfigError, Format, RunConfig};
use model::Built;

#[derive(Parser)]
#[command(name = "kahlerflow", version, about = "Imaginary-time Hamiltonian evolution of Kähler structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; overrides `output.path`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; overrides `output.format`. Defaults to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Chart, metric and class over the grid, for one τ or a sweep.
    Evolve,
    /// κ_τ on the grid and the potential residual summary.
    Potential,
    /// Geodesic residuals at the configured imaginary times.
    Geodesic,
    /// Leaf projection pipeline at (τ, t).
    Blu,
    /// Series against closed form on T*K.
    Tstark,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Potential => "potential",
            Command::Geodesic => "geodesic",
            Command::Blu => "blu",
            Command::Tstark => "tstark",
        }
    }
}

const CONFIG_EXIT: u8 = 2;
const NUMERICAL_EXIT: u8 = 3;

fn thread_pool() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("KAHLERFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("KAHLERFLOW_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(e.to_string()))
}

fn render(report: Report, command: Command, built: &Built, format: Format) -> std::io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("command".into(), json!(command.name()));
            doc.insert("model".into(), json!(built.name.as_str()));
            doc.insert("records".into(), Value::Array(report.records.into_iter().map(Value::Object).collect()));
            doc.insert("summary".into(), Value::Object(report.summary));
            output::write_json(&Value::Object(doc), &mut buf)?;
        }
        Format::Csv => {
            output::write_csv(&report.records, &mut buf)?;
            let mut err = std::io::stderr().lock();
            output::write_json(&Value::Object(report.summary), &mut err)?;
        }
    }
    Ok(buf)
}

fn run(cli: &Cli) -> Result<(), CommandError> {
    thread_pool()?;
    let Some(path) = &cli.config else {
        return Err(ConfigError("--config is required".into()).into());
    };
    let cfg = RunConfig::load(path)?;
    let built = Built::from_config(&cfg)?;
    let report = match cli.command {
        Command::Evolve => commands::evolve(&cfg, &built)?,
        Command::Potential => commands::potential(&cfg, &built)?,
        Command::Geodesic => commands::geodesic(&cfg, &built)?,
        Command::Blu => commands::blu(&cfg, &built)?,
        Command::Tstark => commands::tstark(&cfg, &built)?,
    };
    let format = cli.format.or(cfg.output.format).unwrap_or(Format::Json);
    let bytes = render(report, cli.command, &built, format)
        .map_err(|e| ConfigError(format!("cannot format output: {e}")))?;
    let target = cli.out.clone().or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    match target {
        Some(p) => std::fs::write(&p, bytes).map_err(|e| ConfigError(format!("cannot write {}: {e}", p.display())))?,
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| ConfigError(format!("cannot write output: {e}")))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_EXIT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CommandError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(CONFIG_EXIT)
        }
        Err(CommandError::Numerical(e)) => {
            eprintln!("{e}");
            ExitCode::from(NUMERICAL_EXIT)
        }
    }
}
