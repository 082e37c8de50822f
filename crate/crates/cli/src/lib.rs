//! Batch front end for `pqvar`: every subcommand reads an optional JSON
//! config, applies flag overrides and writes `{config, result}` artifacts.

mod commands;
mod common;
mod error;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub use commands::ito::ItoCheckConfig;
pub use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "pqvar", version, about = "p-variation, Young integrals and local-time checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate semimartingale paths.
    Simulate(commands::simulate::SimulateArgs),
    /// p-variation of a path or (p, q)-variation of a field.
    Variation(commands::variation::VariationArgs),
    /// One-parameter Young integral of test functions.
    Young1d(commands::young::Young1dArgs),
    /// Two-parameter Young integral, forward and backward corners.
    Young2d(commands::young::Young2dArgs),
    /// Local-time fields of simulated paths.
    Localtime(commands::localtime::LocaltimeArgs),
    /// Pathwise check of the extended Itô formula.
    ItoCheck(commands::ito::ItoArgs),
    /// Feasibility of the double-series condition for (p, q).
    ConditionCheck(commands::condition::ConditionArgs),
    /// Built-in worked examples.
    Examples(commands::examples::ExamplesArgs),
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 on success, 1 on input errors, 2 on hypothesis refusals.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Variation(a) => commands::variation::run(a),
        Command::Young1d(a) => commands::young::run_1d(a),
        Command::Young2d(a) => commands::young::run_2d(a),
        Command::Localtime(a) => commands::localtime::run(a),
        Command::ItoCheck(a) => commands::ito::run(a),
        Command::ConditionCheck(a) => commands::condition::run(a),
        Command::Examples(a) => commands::examples::run(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
