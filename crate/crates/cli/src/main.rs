//! `fresnelio`: runs one experiment, writes its tables and summary, and
//! exits 0 when every check passes, 1 when a check fails or a computation
//! breaks down, and 2 on bad flags or configuration.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod corpus;
mod experiments;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use report::CliError;

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FRESNELIO_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("FRESNELIO_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn run() -> Result<bool, CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            // help and version requests exit 0, parse errors exit 2
            std::process::exit(if code == 0 { 0 } else { 2 });
        }
    };
    init_threads()?;
    let (experiment, globals) = args::resolve(cli)?;
    let report = experiments::run(&experiment, &globals)?;
    report.emit(globals.out.as_deref())?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
