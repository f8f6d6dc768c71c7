//! `weakval`: figure data and verification runs for the conditional signal field.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
//! (truncation, grid, convergence) or a failed `verify`. Errors go to stderr as
//! one line of JSON.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, RunConfig};

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: &'static str,
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { kind: "config", code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { kind: "io", code: EXIT_CONFIG, message: message.into() }
    }

    fn to_json_line(&self) -> String {
        json!({ "error": self.kind, "exit_code": self.code, "message": self.message }).to_string()
    }
}

impl From<weakval_core::Error> for CliError {
    fn from(e: weakval_core::Error) -> Self {
        use weakval_core::Error as E;
        let kind = match e {
            E::InvalidParams(_) => "invalid_params",
            E::Domain(_) => "domain",
            E::TruncationInsufficient { .. } => "truncation_insufficient",
            E::TruncationCapExceeded { .. } => "truncation_cap_exceeded",
            E::NonConvergence { .. } => "non_convergence",
            E::NormUnderflow { .. } => "norm_underflow",
            E::GridTooNarrow { .. } => "grid_too_narrow",
            E::NegativeProbability { .. } => "negative_probability",
            E::UndefinedQ => "undefined_q",
        };
        let code = if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERIC };
        Self { kind, code, message: e.to_string() }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli.command.args())?;
    let (table, ok) = match &cli.command {
        Command::Quadrature(_) => (commands::quadrature(&cfg)?, true),
        Command::Photons(_) => (commands::photons(&cfg)?, true),
        Command::Mandel(_) => (commands::mandel(&cfg)?, true),
        Command::Wigner(_) => (commands::wigner_cmd(&cfg)?, true),
        Command::Verify(_) => commands::verify(&cfg)?,
    };
    output::emit(&table.render(cfg.format)?, cfg.out.as_deref())?;
    if ok {
        Ok(())
    } else {
        let failed = table.params.iter().find(|(k, _)| *k == "failed").map(|(_, v)| v.clone());
        let n = match failed {
            Some(output::Cell::Int(n)) => n,
            _ => 0,
        };
        Err(CliError {
            kind: "verify_failed",
            code: EXIT_NUMERIC,
            message: format!("{n} {} failed", if n == 1 { "check" } else { "checks" }),
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message = text.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::config(message).to_json_line());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.code)
        }
    }
}
