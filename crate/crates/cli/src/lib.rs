//! Command-line front end for `resetdf`.
//!
//! Exit codes: 0 success, 2 usage, 3 convergence, 4 validation, 5 numerical.

pub mod args;
pub mod commands;
pub mod csv;
pub mod element;
pub mod exit;

use std::ffi::OsString;

use clap::Parser;

/// Parses `argv` and runs the command, returning the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> i32 {
    let argv = match args::expand_spec_file(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
