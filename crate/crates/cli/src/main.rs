mod args;
mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};
use thiserror::Error;

use args::{Cli, Command};
use config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] beltrami_core::error::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use beltrami_core::error::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Config(_) | E::Input(_)) => 2,
            _ => 1,
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Spectrum(_) => "spectrum",
        Command::Check(_) => "check",
        Command::Energy(_) => "energy",
        Command::Flow(_) => "flow",
        Command::Convergence(_) => "convergence",
        Command::Selftest => "selftest",
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: Option<usize>) -> Result<(), CliError> {
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg: RunConfig = cli.resolve()?;
    set_threads(cfg.threads)?;
    let outcome = match &cli.command {
        Command::Spectrum(_) => commands::spectrum(&cfg)?,
        Command::Check(_) => commands::check(&cfg)?,
        Command::Energy(_) => commands::energy_cmd(&cfg)?,
        Command::Flow(_) => commands::flow(&cfg)?,
        Command::Convergence(_) => commands::convergence(&cfg)?,
        Command::Selftest => commands::selftest_cmd()?,
    };
    let mut doc = json!({
        "schema": SCHEMA,
        "command": command_name(&cli.command),
        "config": cfg,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, outcome.body) {
        d.extend(b);
    }
    output::emit(&output::to_json(&doc)?, cfg.out.as_deref())?;
    if let Some(msg) = &outcome.failure {
        eprintln!("{msg}");
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
