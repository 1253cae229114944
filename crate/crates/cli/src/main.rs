//! `degensemi`: configuration-driven sweeps over the degenerate diffusion
//! library, written as CSV tables with a plain-text verdict summary.

mod config;
mod evolve;
mod oracle;
mod output;
mod plot;
mod suites;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_seed, LoadedConfig, DEFAULT_CONFIG, DEFAULT_SEED};
use output::{Header, Sink, Verdicts};
use suites::Suite;

#[derive(Debug, Parser)]
#[command(name = "degensemi", version, about = "Resolvent, semigroup and localization sweeps for degenerate diffusions")]
struct Cli {
    /// TOML run configuration; the built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. DEGENSEMI_OUT takes precedence when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Hexadecimal seed, e.g. 0xF001.
    #[arg(long, global = true, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Half-line closed-form resolvent bounds and identities.
    Oracle,
    /// Estimate sweeps on discretized operators.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Time-evolution snapshots of an initial datum.
    Evolve {
        /// Comma-separated times overriding `evolve.times`.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// Also write one SVG per snapshot.
        #[arg(long)]
        plot: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<degensemi_core::Error> for CliError {
    fn from(e: degensemi_core::Error) -> Self {
        use degensemi_core::Error as E;
        match e {
            E::InvalidInput(_) | E::Hypothesis(_) | E::ShapeMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 3,
        }
    }
}

const EXIT_ESTIMATE_FAILED: u8 = 2;

fn load(cli: &Cli) -> Result<LoadedConfig, CliError> {
    match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            LoadedConfig::parse(&text, &path.display().to_string())
        }
        None => LoadedConfig::parse(DEFAULT_CONFIG, "built-in default"),
    }
}

fn out_dir(cli: &Cli, loaded: &LoadedConfig) -> PathBuf {
    match std::env::var_os("DEGENSEMI_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => cli.out.clone().unwrap_or_else(|| PathBuf::from(&loaded.config.output.dir)),
    }
}

/// `Ok(true)` when every estimate passed.
fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let loaded = load(cli)?;
    let cfg = &loaded.config;
    let seed = match (cli.seed, &cfg.sweep.seed) {
        (Some(s), _) => s,
        (None, Some(text)) => parse_seed(text).map_err(CliError::Config)?,
        (None, None) => DEFAULT_SEED,
    };
    let sink = Sink::new(
        &out_dir(cli, &loaded),
        Header {
            config_hash: loaded.hash.clone(),
            seed,
        },
    )?;
    match &cli.command {
        Command::Oracle => oracle::run(cfg, seed, &sink),
        Command::Verify { suite } => {
            let reports = suites::run(cfg, *suite, seed)?;
            let mut verdicts = Verdicts::default();
            for (key, report) in &reports {
                sink.report(&format!("{key}.csv"), report)?;
                verdicts.record(key, report);
            }
            let text = verdicts.render();
            sink.raw("verdicts.txt", &text)?;
            print!("{text}");
            Ok(verdicts.passed())
        }
        Command::Evolve { times, plot } => {
            let times = times.clone().unwrap_or_else(|| cfg.evolve.times.clone());
            if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
                return Err(CliError::Config(format!("--times must be nonnegative, got {t}")));
            }
            evolve::run(cfg, &times, *plot || cfg.output.plots, &sink)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ESTIMATE_FAILED),
        Err(e) => {
            eprintln!("degensemi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use degensemi_core::Error as E;

    #[test]
    fn core_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(E::InvalidInput("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(E::ShapeMismatch { expected: 2, got: 3 }).exit_code(), 1);
        assert_eq!(CliError::from(E::ContractionTooLarge { measured: 0.7 }).exit_code(), 3);
        assert_eq!(CliError::from(E::Singular { row: 0, condition: 1e20 }).exit_code(), 3);
        assert_eq!(CliError::Io("disk".into()).exit_code(), 1);
    }
}
