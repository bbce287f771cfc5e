//! `qhitting`: validate maps and compute hitting times from JSON files.
//!
//! Exit codes: 0 success, 1 parse error, 2 invalid map, 3 query precondition,
//! 4 self-test failure, 5 numerical failure.

// `!(x > 0.0)` style comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod classical;
mod failure;
mod hit;
mod input;
mod report;
mod selftest;
mod validate;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use failure::{CliResult, PARSE};

fn dispatch(cli: &Cli) -> CliResult<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { file } => validate::run(file, g),
        Command::Hit { map, query, method, orthogonal } => hit::run(map, query, g, *method, *orthogonal),
        Command::Classical { file, query, trials } => classical::run(file, query, *trials, g),
        Command::Selftest { perturb } => selftest::run(*perturb, g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(PARSE),
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
