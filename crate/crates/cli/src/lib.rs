//! File formats, persistence and the command-line runner around
//! `celebprof-core`.

pub mod archive;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;

use std::ffi::OsString;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};

use clap::Parser;

use crate::error::CliError;

/// Parses `argv`, runs the command and returns the process exit code.
/// Errors are written to `err` as one JSON line.
pub fn execute<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(argv) {
        Ok(parsed) => parsed,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let message = e.to_string();
            let summary: Vec<&str> = message
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            let summary = summary.join(" ");
            return report(CliError::config(summary.trim_start_matches("error: ")), err);
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| commands::dispatch(parsed.command, out, err)));
    match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => report(e, err),
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            report(CliError::internal(message), err)
        }
    }
}

fn report(e: CliError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "{}", e.to_json_line());
    e.exit_code()
}
