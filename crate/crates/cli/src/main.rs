// NaN-rejecting guards are written `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::Parser;

mod cli;
mod commands;
mod error;
mod files;
mod output;

use cli::{Cli, CoeffsCommand, Command};
use error::{CliResult, Outcome};

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Coeffs(CoeffsCommand::Gen(args)) => commands::coeffs::generate(g, args),
        Command::Coeffs(CoeffsCommand::Check(args)) => commands::coeffs::check(g, args),
        Command::Extend(args) => commands::extend::run(g, args),
        Command::Probe(cmd) => commands::probe::run(g, cmd),
        Command::Domain(cmd) => commands::domain::run(g, cmd),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(1)
        }
    }
}
