//! File formats and the `vqsvm` command-line front end for `vqsvm-core`.

pub mod args;
pub mod commands;
pub mod exit;
pub mod formats;

use std::ffi::OsString;

use clap::Parser;

/// Parses `argv` (after `--config` expansion) and runs the command,
/// returning the process exit code.
pub fn main_with_args(argv: Vec<OsString>) -> u8 {
    let result = args::expand_config(argv).and_then(|argv| match args::Cli::try_parse_from(argv) {
        Ok(cli) => commands::run(&cli.command),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            Ok(())
        }
        Err(e) => {
            let _ = e.print();
            Err(e.into())
        }
    });
    match result {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<clap::Error>().is_none() {
                eprintln!("error: {e:#}");
            }
            exit::code_for(&e)
        }
    }
}
