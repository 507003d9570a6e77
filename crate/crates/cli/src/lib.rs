//! Command-line front end of `esd-indep`: configuration, CSV ingestion,
//! calibration caching, simulation tables and the price-panel study.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod matrix;
pub mod output;
pub mod prices;
pub mod tables;

use args::Parsed;
use config::RunConfig;
use error::{exit, CliError};

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    match try_run(argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("esdtest: {e}");
            e.exit_code()
        }
    }
}

fn try_run<I, S>(argv: I) -> Result<i32, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = match args::parse(argv)? {
        Parsed::Args(a) => a,
        Parsed::Display(text) => {
            print!("{text}");
            return Ok(exit::OK);
        }
    };
    let cfg = RunConfig::from_args(&args)?;
    esd_indep::calibrate::with_threads(cfg.threads, || commands::dispatch(&cfg))
}
