//! `framepick` command-line tool.
//!
//! Exit codes: 0 on success, 1 for invalid arguments, configurations or
//! data, 2 when a file cannot be read or written.

mod cli;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use cli::{Cli, Command, Simulate};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(Simulate::Spectra(a)) => commands::simulate_spectra(a),
        Command::Simulate(Simulate::Phantom(a)) => commands::simulate_phantom(a),
        Command::Pick(a) => commands::pick(a),
        Command::Denoise(a) => commands::denoise(a),
        Command::Eval(a) => commands::eval(a),
        Command::Render(a) => commands::render(a),
        Command::TuneLambda(a) => commands::tune_lambda(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
