//! `varfam`: train subword embeddings on a JSONL corpus, induce variant
//! families, and serve them for annotation.
//!
//! Exit status is 0 on success, 1 for usage or configuration errors and 2
//! for failures while running.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// A failure, split by exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl From<varfam_core::Error> for Failure {
    fn from(e: varfam_core::Error) -> Failure {
        match e {
            varfam_core::Error::Config { .. } => Failure::Usage(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VF_LOG", "info").write_style("VF_LOG_STYLE"))
        .format_timestamp_millis()
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Usage(e) | Failure::Runtime(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.exit_code())
        }
    }
}
