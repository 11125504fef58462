//! Command-line front-end: reads a run configuration, dispatches to the
//! computation modules and writes `report.json` plus CSV tables.
//!
//! Exit status: 0 when every contract holds, 1 when a contract is violated
//! (the report names it), 2 for usage and configuration errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kato_core::Exec;
use serde_json::json;

pub use commands::{execute, Context, Outcome, Table};
pub use config::{Command, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONTRACT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Contract(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Contract(m) => write!(f, "contract violation: {m}"),
        }
    }
}

/// Every flag can also be set through the environment variable shown in
/// `--help` (prefix `KATO_`).
#[derive(Debug, Parser)]
#[command(name = "kato", version, about = "Kato-class potentials, covariant Schrödinger operators and Feynman-Kac checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
    /// output directory (overrides `output` in the config)
    #[arg(long, global = true, env = "KATO_OUT")]
    pub out: Option<PathBuf>,
    /// random seed (overrides `seed` in the config)
    #[arg(long, global = true, env = "KATO_SEED")]
    pub seed: Option<u64>,
    /// worker threads, 0 lets the pool decide
    #[arg(long, global = true, env = "KATO_WORKERS")]
    pub workers: Option<usize>,
    /// canonical single-worker mode
    #[arg(long, global = true, env = "KATO_REFERENCE")]
    pub reference: bool,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Kato-class verdict with η(t) and C_r grids
    KatoTest(Source),
    /// form-bound constants (C₁, C₂), optionally checked on a mesh
    FormBounds(Source),
    /// lowest eigenvalues of a mesh operator
    Spectrum(Source),
    /// Kato inequality, semigroup domination and form limit on a mesh
    CheckInequalities(Source),
    /// Feynman-Kac Monte Carlo estimators
    FkMc(Source),
    /// run whatever command the config names
    Run(Source),
    /// print the catalog of bundled spaces, potentials, meshes and configs
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct Source {
    /// JSON run configuration
    #[arg(long, env = "KATO_CONFIG", conflicts_with = "bundled")]
    pub config: Option<PathBuf>,
    /// bundled configuration id (see `kato list`)
    #[arg(long)]
    pub bundled: Option<String>,
}

pub const DEFAULT_OUT: &str = "kato-out";

pub fn load_config(src: &Source) -> Result<RunConfig, CliError> {
    if let Some(id) = &src.bundled {
        return catalog::config(id).ok_or_else(|| CliError::Usage(format!("unknown bundled config `{id}`")));
    }
    let path = src
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("pass --config <path> or --bundled <id>".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Options that do not belong to the config file itself.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub reference: bool,
}

impl RunOptions {
    pub fn exec(&self) -> Exec {
        if self.reference {
            Exec::reference()
        } else {
            self.workers.map(Exec::with_workers).unwrap_or_default()
        }
    }
}

/// Run one configuration, write the report and return the exit status.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<(u8, PathBuf), CliError> {
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context { exec: opts.exec(), seed };
    let (status, result, tables, violations) = match execute(cfg, &ctx) {
        Ok(o) => {
            let status = if o.violations.is_empty() { "pass" } else { "fail" };
            (status, o.result, o.tables, o.violations)
        }
        Err(e @ CliError::Usage(_)) => return Err(e),
        Err(CliError::Contract(m)) => ("fail", serde_json::Value::Null, Vec::new(), vec![m]),
    };
    let report = json!({
        "command": cfg.command,
        "status": status,
        "violations": violations,
        "seed": seed,
        "config": cfg,
        "result": result,
    });
    write_report(&dir, &report, &tables)?;
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_CONTRACT };
    Ok((code, dir))
}

fn write_report(dir: &Path, report: &serde_json::Value, tables: &[Table]) -> Result<(), CliError> {
    output::write_all(dir, report, tables).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", dir.display())))
}

fn list(json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(catalog::CATALOG).expect("catalog serializes");
        s.push('\n');
        return s;
    }
    let mut out = String::new();
    for e in catalog::CATALOG {
        let kind = serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        out.push_str(&format!("{kind:<10} {:<24} {}\n", e.id, e.description));
    }
    out
}

/// Entry point shared by the binary and the tests.
pub fn main_with(cli: Cli) -> ExitCode {
    let opts = RunOptions {
        out: cli.out,
        seed: cli.seed,
        workers: cli.workers,
        reference: cli.reference,
    };
    let (source, forced) = match &cli.command {
        Cmd::List { json } => {
            print!("{}", list(*json));
            return ExitCode::from(EXIT_OK);
        }
        Cmd::Run(s) => (s, None),
        Cmd::KatoTest(s) => (s, Some(Command::KatoTest)),
        Cmd::FormBounds(s) => (s, Some(Command::FormBounds)),
        Cmd::Spectrum(s) => (s, Some(Command::Spectrum)),
        Cmd::CheckInequalities(s) => (s, Some(Command::CheckInequalities)),
        Cmd::FkMc(s) => (s, Some(Command::FkMc)),
    };
    let result = load_config(source).and_then(|cfg| {
        if let Some(c) = forced {
            if c != cfg.command {
                return Err(CliError::Usage(format!(
                    "config is for `{}`, not `{}`",
                    cfg.command.name(),
                    c.name()
                )));
            }
        }
        run(&cfg, &opts)
    });
    match result {
        Ok((code, dir)) => {
            let status = if code == EXIT_OK { "pass" } else { "FAIL" };
            eprintln!("{status}: report written to {}", dir.join("report.json").display());
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
