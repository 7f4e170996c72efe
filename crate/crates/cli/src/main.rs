use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use rangecount_cli::commands::{resolve_out, run, Cli};
use rangecount_cli::harness::write_atomic;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(note) = &out.note {
        eprintln!("{note}");
    }
    if let Some(l) = &out.ledger {
        eprintln!("{}", l.summary());
    }
    let written = match &out.out {
        Some(path) => write_atomic(&resolve_out(path), &out.body),
        None => std::io::stdout().write_all(&out.body).map_err(Into::into),
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
