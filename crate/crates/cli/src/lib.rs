//! `aeronet` command line: one subcommand per planning stage plus the end-to-end
//! pipeline. Every output file records the hash of the inputs that produced it.

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

pub mod args;
mod cmd;
pub mod error;
pub mod hash;
pub mod io;
pub mod pipeline;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

/// Environment variable bounding the worker threads.
pub const THREADS_ENV: &str = "AERONET_THREADS";

/// Runs one parsed command and returns the files it wrote.
pub fn run(cmd: &Command) -> CliResult<Vec<std::path::PathBuf>> {
    match cmd {
        Command::Netplan(a) => cmd::netplan::run(a),
        Command::Route(a) => cmd::route::run(a),
        Command::Gwp(a) => cmd::gwp::run(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::ScenarioGen(a) => cmd::scenario_gen::run(a),
        Command::Report(a) => cmd::report::run(a),
        Command::Pipeline(a) => pipeline::run_cli(a),
    }
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn print_version(out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "aeronet {}", env!("CARGO_PKG_VERSION"))?;
    for (name, h) in hash::profile_hashes() {
        writeln!(out, "{name} sha256:{h}")?;
    }
    Ok(())
}

fn report_error(e: &CliError, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("error: {e}");
    }
    ExitCode::from(e.exit_code())
}

/// Parses `args`, runs the command, and maps the outcome to an exit code: 0 iff every
/// requested artifact was written.
pub fn main_with_args<I, S>(args: I) -> ExitCode
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if json => return report_error(&CliError::usage(e.kind().to_string() + ": " + &e.render().to_string()), true),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    if cli.version {
        let _ = print_version(&mut std::io::stdout().lock());
        return ExitCode::SUCCESS;
    }
    let Some(command) = &cli.command else {
        return report_error(&CliError::usage("a subcommand is required (see --help)"), cli.json_errors);
    };
    if let Err(e) = configure_threads() {
        return report_error(&e, cli.json_errors);
    }
    match run(command) {
        Ok(written) => {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => report_error(&e, cli.json_errors),
    }
}
