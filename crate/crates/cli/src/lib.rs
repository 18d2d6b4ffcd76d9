//! Command-line front end: config loading, dispatch and report emission.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use slope_chain::config::{parse_config, RunConfig};
use slope_chain::linalg::format_rational;
use slope_chain::{Error, Result};

pub mod commands;
pub mod report;

use commands::Outcome;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "slope-chain", version, about = "Slope chains of finitely generated subgroups of vector groups")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(short = 'c', long = "config", global = true)]
    pub config: Option<PathBuf>,
    /// Report path (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV path for commands that produce a table.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides one limit, as `key=value`; repeatable.
    #[arg(long = "limit", global = true, value_name = "KEY=VALUE")]
    pub limits: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chain construction and certification.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Rank-density exponents at equal scales.
    Mu,
    /// Box images and coset counts.
    #[command(subcommand)]
    Gamma(GammaCommand),
    /// Jet evaluation and base-locus probes.
    #[command(subcommand)]
    Locus(LocusCommand),
    /// Polygon vertices as CSV.
    #[command(subcommand)]
    Polygon(PolygonCommand),
}

#[derive(Debug, Subcommand)]
pub enum ChainCommand {
    Build,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum GammaCommand {
    Enumerate,
    Count,
    Check,
}

#[derive(Debug, Subcommand)]
pub enum LocusCommand {
    Rank,
    Probe,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum PolygonCommand {
    Export,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Chain(ChainCommand::Build) => "chain build",
            Command::Chain(ChainCommand::Verify) => "chain verify",
            Command::Mu => "mu",
            Command::Gamma(GammaCommand::Enumerate) => "gamma enumerate",
            Command::Gamma(GammaCommand::Count) => "gamma count",
            Command::Gamma(GammaCommand::Check) => "gamma check",
            Command::Locus(LocusCommand::Rank) => "locus rank",
            Command::Locus(LocusCommand::Probe) => "locus probe",
            Command::Locus(LocusCommand::Sweep) => "locus sweep",
            Command::Polygon(PolygonCommand::Export) => "polygon export",
        }
    }

    fn execute(&self, cfg: &RunConfig) -> Result<Outcome> {
        match self {
            Command::Chain(ChainCommand::Build) => commands::chain_build(cfg),
            Command::Chain(ChainCommand::Verify) => commands::chain_verify(cfg),
            Command::Mu => commands::mu(cfg),
            Command::Gamma(GammaCommand::Enumerate) => commands::gamma_enumerate(cfg),
            Command::Gamma(GammaCommand::Count) => commands::gamma_count(cfg),
            Command::Gamma(GammaCommand::Check) => commands::gamma_check(cfg),
            Command::Locus(LocusCommand::Rank) => commands::locus_rank(cfg),
            Command::Locus(LocusCommand::Probe) => commands::locus_probe_cmd(cfg),
            Command::Locus(LocusCommand::Sweep) => commands::locus_sweep(cfg),
            Command::Polygon(PolygonCommand::Export) => commands::polygon_export(cfg),
        }
    }

    /// Polygon export prints its table when no CSV path is given.
    fn csv_on_stdout(&self) -> bool {
        matches!(self, Command::Polygon(_))
    }
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli.config.as_ref().ok_or_else(|| Error::ValidationError {
        field: "config".into(),
        message: "a configuration file is required (-c/--config)".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::ValidationError {
        field: "config".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    for item in &cli.limits {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::ValidationError {
            field: "limit".into(),
            message: format!("expected KEY=VALUE, got {item:?}"),
        })?;
        cfg.set_limit(k.trim(), v)?;
    }
    Ok(cfg)
}

fn provenance(cfg: &RunConfig) -> Value {
    let assignment: serde_json::Map<String, Value> = cfg
        .model
        .assignment()
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(format_rational(v))))
        .collect();
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "permutation": cfg.model.permutation(),
        "assignment": assignment,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::ValidationError {
        field: "output".into(),
        message: format!("{}: {e}", path.display()),
    })
}

/// Report status and exit code of a command result.
pub fn status(outcome: &Result<Outcome>) -> (&'static str, i32) {
    match outcome {
        Ok(o) if o.passed => ("ok", EXIT_OK),
        Ok(_) => ("check_failed", EXIT_VIOLATION),
        Err(e) if e.is_certificate_violation() => ("violation", EXIT_VIOLATION),
        Err(_) => ("error", EXIT_ERROR),
    }
}

/// Runs one command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let name = cli.command.name();
    let cfg = load(&cli);
    let (outcome, cfg) = match cfg {
        Ok(cfg) => (cli.command.execute(&cfg), Some(cfg)),
        Err(e) => (Err(e), None),
    };
    let (status, code) = status(&outcome);
    let mut doc = json!({
        "schema": report::SCHEMA,
        "command": name,
        "status": status,
        "config": cfg.as_ref().map(|c| serde_json::to_value(&c.file).expect("config serializes")),
        "provenance": cfg.as_ref().map(provenance),
        "result": Value::Null,
    });
    let mut csv = None;
    match outcome {
        Ok(o) => {
            doc["result"] = o.result;
            csv = o.csv;
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            doc["error"] = report::error(&e);
        }
    }
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    let out_path = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.file.output.report.clone().map(PathBuf::from)));
    let csv_path = cli
        .csv
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.file.output.csv.clone().map(PathBuf::from)));
    let mut io_result = Ok(());
    if let Some(table) = &csv {
        match &csv_path {
            Some(p) => io_result = io_result.and(write_file(p, table)),
            None if cli.command.csv_on_stdout() => {
                let _ = write!(stdout, "{table}");
            }
            None => {}
        }
    }
    let report_on_stdout = !(csv.is_some() && csv_path.is_none() && cli.command.csv_on_stdout());
    match &out_path {
        Some(p) => io_result = io_result.and(write_file(p, &text)),
        None if report_on_stdout => {
            let _ = write!(stdout, "{text}");
        }
        None => {}
    }
    if let Err(e) = io_result {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_ERROR;
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(passed: bool) -> Result<Outcome> {
        Ok(Outcome {
            result: Value::Null,
            passed,
            csv: None,
        })
    }

    #[test]
    fn exit_codes() {
        assert_eq!(status(&outcome(true)), ("ok", EXIT_OK));
        assert_eq!(status(&outcome(false)), ("check_failed", EXIT_VIOLATION));
        let v = Err(Error::CertificateViolation {
            check: "chi".into(),
            step: 0,
            detail: String::new(),
        });
        assert_eq!(status(&v), ("violation", EXIT_VIOLATION));
        assert_eq!(status(&Err(Error::SymbolicModelNotSpecialized)), ("error", EXIT_ERROR));
    }

    #[test]
    fn command_names() {
        let cli = Cli::try_parse_from(["slope-chain", "locus", "sweep", "-c", "x.json"]).unwrap();
        assert_eq!(cli.command.name(), "locus sweep");
        assert_eq!(cli.config, Some(PathBuf::from("x.json")));
    }
}
