//! Command-line frontend: argument grammar, dispatch, output and manifests.
//!
//! [`run_with_io`] is the whole program minus process exit, so tests can
//! drive it in-process.

pub mod commands;
pub mod figures;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use bellstat_core::BellError;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{Format, Output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "bellstat", version, about = "Bell-correlation witnesses and finite-statistics run counts")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output encoding; records default to json, tables to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here (atomically) instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and simulations (0 = all cores).
    #[arg(long, global = true, env = "BELLSTAT_THREADS")]
    pub threads: Option<usize>,
    /// Suppress the run manifest on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Local bound of the Bell inequality, optionally checked by enumeration.
    Bound(commands::BoundArgs),
    /// Witness value and optimal angles at a measured point.
    Witness(commands::WitnessArgs),
    /// Critical curve Z_m(C_b) on a grid.
    Curve(commands::CurveArgs),
    /// Squeezing needed to see a violation with N spins.
    Squeeze(commands::SqueezeArgs),
    /// Runs needed to certify a violation at confidence 1 - epsilon.
    Runs(commands::RunsArgs),
    /// Confidence level where the Uspensky and Bernstein run counts cross.
    Crossover(commands::CrossoverArgs),
    /// Monte Carlo estimate of the empirical p-value of a source model.
    Simulate(commands::SimulateArgs),
    /// Data behind one of the figures.
    Figure(figures::FigureArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bound(_) => "bound",
            Command::Witness(_) => "witness",
            Command::Curve(_) => "curve",
            Command::Squeeze(_) => "squeeze",
            Command::Runs(_) => "runs",
            Command::Crossover(_) => "crossover",
            Command::Simulate(_) => "simulate",
            Command::Figure(_) => "figure",
        }
    }

    fn is_seeded(&self) -> bool {
        matches!(self, Command::Simulate(_))
    }

    fn parameters(&self) -> Value {
        let tagged = serde_json::to_value(self).expect("arguments are serialisable");
        tagged
            .as_object()
            .and_then(|o| o.values().next().cloned())
            .unwrap_or(Value::Null)
    }
}

/// Everything needed to rerun a command: parameters are keyed by flag name.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

/// Failure of a parsed command; usage errors are handled by clap.
#[derive(Debug)]
pub enum CliError {
    Bell(BellError),
    Io(std::io::Error),
}

impl From<BellError> for CliError {
    fn from(e: BellError) -> Self {
        CliError::Bell(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Bell(e) => json!({"error": e.code(), "detail": e.to_string()}),
            CliError::Io(e) => json!({"error": "io", "detail": e.to_string()}),
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            EXIT_DOMAIN
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let seed = cli.global.seed.unwrap_or(0);
    let result = pool.install(|| dispatch(&cli.command, seed))?;
    let format = cli.global.format.unwrap_or_else(|| result.default_format());
    let rendered = result.render(format);

    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        parameters: cli.command.parameters(),
        seed: cli.command.is_seeded().then_some(seed),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest).expect("manifest is serialisable");
    manifest_text.push('\n');

    match &cli.global.out {
        Some(path) => {
            output::write_atomic(path, rendered.as_bytes())?;
            let mut sidecar = path.clone().into_os_string();
            sidecar.push(".manifest.json");
            output::write_atomic(&PathBuf::from(sidecar), manifest_text.as_bytes())?;
        }
        None => {
            stdout.write_all(rendered.as_bytes())?;
            stdout.flush()?;
            if !cli.global.quiet {
                stderr.write_all(manifest_text.as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Run one parsed subcommand.
pub fn dispatch(command: &Command, seed: u64) -> Result<Output, BellError> {
    match command {
        Command::Bound(a) => commands::bound(a),
        Command::Witness(a) => commands::witness(a),
        Command::Curve(a) => commands::curve(a),
        Command::Squeeze(a) => commands::squeeze(a),
        Command::Runs(a) => commands::runs(a),
        Command::Crossover(a) => commands::crossover(a),
        Command::Simulate(a) => commands::simulate(a, seed),
        Command::Figure(a) => figures::figure(a),
    }
}
