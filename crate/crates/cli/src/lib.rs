//! Batch front-end over the `translucent` library.
//!
//! Every subcommand reads one JSON document (`--config`) and writes a JSON
//! report, a CSV file or a violation listing. Exit status is 0 on success,
//! 1 when the command found a disagreement or violation, 2 on input errors.

pub mod commands;
pub mod config;
pub mod sweep;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use translucent::games::DEFAULT_BUDGET;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration, unreadable file or exceeded budget.
    Input(String),
    /// A computation that failed on its own terms, such as a solver that did not converge.
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<translucent::Error> for CliError {
    fn from(e: translucent::Error) -> Self {
        match e {
            translucent::Error::QreNotConverged { .. } => CliError::Domain(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    /// Whether the command found what it treats as a failure.
    pub failed: bool,
    /// Lines for standard error.
    pub notes: Vec<String>,
    /// Destination named by the config itself, used when `--out` is absent.
    pub default_out: Option<PathBuf>,
}

impl Outcome {
    pub fn new(output: String, failed: bool) -> Self {
        Outcome {
            output,
            failed,
            notes: Vec::new(),
            default_out: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.failed as i32
    }
}

#[derive(Debug, Parser)]
#[command(name = "translucent", version, about = "Translucent rationality in social dilemmas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration document.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Enumeration budget for brute-force checks and sweep size.
    #[arg(long, global = true, value_name = "INT", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Closed-form and brute-force cooperation verdicts for one type.
    Check,
    /// Grid sweep written as CSV.
    Sweep,
    /// Equilibrium verdicts for a two-point mixed profile.
    Equilibrium,
    /// Predicted cooperation rate of a population of types.
    Population,
    /// Check a counterfactual structure file against the structure axioms.
    ValidateStructure {
        /// Structure file; `--config` may be used instead.
        file: Option<PathBuf>,
    },
    /// Logit quantal response equilibria over a lambda grid.
    Qre,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn config_text(cli: &Cli) -> Result<String, CliError> {
    match &cli.config {
        Some(p) => read(p),
        None => Err(CliError::Input("--config <PATH> is required".into())),
    }
}

/// Runs the parsed command without touching standard output.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check => commands::check(&config_text(cli)?, cli.budget),
        Command::Sweep => {
            let spec: sweep::SweepSpec = config::parse(&config_text(cli)?)?;
            let result = sweep::run_sweep(&spec, cli.budget)?;
            let mut outcome = Outcome::new(result.csv, !result.spot.mismatches.is_empty());
            outcome.notes = result.spot.mismatches.clone();
            outcome.notes.push(format!(
                "spot check: {} row(s) re-verified, {} mismatch(es)",
                result.spot.checked,
                result.spot.mismatches.len()
            ));
            outcome.default_out = spec.out.map(PathBuf::from);
            Ok(outcome)
        }
        Command::Equilibrium => commands::equilibrium(&config_text(cli)?, cli.budget),
        Command::Population => commands::population(&config_text(cli)?),
        Command::ValidateStructure { file } => {
            let path = file
                .as_ref()
                .or(cli.config.as_ref())
                .ok_or_else(|| CliError::Input("structure file path is required".into()))?;
            commands::validate(&read(path)?).map_err(|e| match e {
                CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
                other => other,
            })
        }
        Command::Qre => commands::qre(&config_text(cli)?, cli.budget),
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    match cli.out.as_ref().or(outcome.default_out.as_ref()) {
        Some(path) => {
            if let Err(e) = fs::write(path, &outcome.output) {
                eprintln!("error: {}: {e}", path.display());
                return 2;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(outcome.output.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return 2;
            }
        }
    }
    outcome.exit_code()
}
