//! The `memvac` command line.
//!
//! Exit status: 0 on success, 1 on bad input or violated physics
//! preconditions (one `error: kind=... message="..."` line on stderr), 2 when
//! `oracle-verify` finds residuals over tolerance (a failure table is written).
//!
//! Flags given on the command line override the same settings in `--config`.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::RunOutcome;

#[derive(Debug, Parser)]
#[command(name = "memvac", version, about = "Code-indexed memory vacua: experiments and oracle checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment description (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for artifacts and the run manifest.
    #[arg(long, global = true, default_value = "memvac-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the distinguishability threshold.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Fock truncation per oscillator for oracle checks.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Suppress the progress summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Append a memory to a registry file.
    Print(PrintArgs),
    /// Fidelity matrix of stored memories, optionally scored against a probe code.
    Recall(RecallArgs),
    /// Per-mode observables of each configured code along the time grid.
    Evolve,
    /// Self-overlap, vacuum overlap and occupation along the time grid.
    Forgetting,
    /// Greedy capacity sweep over mode counts.
    Capacity,
    /// Association graph of memories whose fidelity exceeds a threshold.
    Associate(AssociateArgs),
    /// Entropy, energy, effective temperatures and first-law ledger.
    ThermoTrace,
    /// Compare closed forms against the truncated Fock-space oracle.
    OracleVerify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PrintArgs {
    /// Registry file; created when missing.
    #[arg(long)]
    pub registry: PathBuf,
    #[arg(long)]
    pub id: String,
    /// Comma-separated code parameters, one per mode.
    #[arg(long, value_delimiter = ',', conflicts_with = "beta", required_unless_present = "beta")]
    pub thetas: Option<Vec<f64>>,
    /// Print the Bose-distributed code at this inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Printing time.
    #[arg(long, default_value_t = 0.0)]
    pub at: f64,
    /// Mode count for a new registry (without `--config`).
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct MemorySource {
    /// Read memories from this registry instead of the config codes.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Evaluation time (overrides the config).
    #[arg(long)]
    pub time: Option<f64>,
    /// Evolve each memory from its own printing time.
    #[arg(long)]
    pub staggered: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RecallArgs {
    #[command(flatten)]
    pub source: MemorySource,
    /// Comma-separated probe code.
    #[arg(long, value_delimiter = ',', conflicts_with = "probe_id")]
    pub probe: Option<Vec<f64>>,
    /// Use a stored memory's code as the probe.
    #[arg(long)]
    pub probe_id: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AssociateArgs {
    #[command(flatten)]
    pub source: MemorySource,
    /// Edge threshold (defaults to the config threshold, then epsilon).
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Suites to run (repeatable); default all.
    #[arg(long = "suite")]
    pub suites: Vec<String>,
}

/// One-line, machine-parsable error report.
pub fn error_line(kind: &str, message: &str) -> String {
    let quoted = serde_json::to_string(message).unwrap_or_else(|_| "\"\"".into());
    format!("error: kind={kind} message={quoted}")
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    let msg = e.render().to_string();
                    let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                    eprintln!("{}", error_line("usage", first));
                    1
                }
            };
        }
    };
    match commands::run(&cli) {
        Ok(RunOutcome::Success) => 0,
        Ok(RunOutcome::VerificationFailed { failures }) => {
            eprintln!(
                "{}",
                error_line("verification", &format!("{failures} oracle checks over tolerance"))
            );
            2
        }
        Err(e) => {
            report(&e);
            1
        }
    }
}

fn report(e: &Error) {
    eprintln!("{}", error_line(e.kind(), &e.to_string()));
}
