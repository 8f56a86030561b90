//! `planted-mst`: generate planted instances, recover them by MST, and
//! evaluate the large-`n` theory.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;
use commands::CliError;

const SCHEMA_VERSION: u32 = 1;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report(&CliError::Usage(e.to_string()));
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(err: &CliError) -> ExitCode {
    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": err.kind(), "message": err.to_string() },
    });
    eprintln!("{body}");
    ExitCode::from(err.exit_code())
}
