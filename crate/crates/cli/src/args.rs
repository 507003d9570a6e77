//! Command-line flags and the flat `key=value` configuration file.
//!
//! A configuration file contributes the same keys as the long flags
//! (`k-cal = 500`, `no-standardize = true`). Flags given on the command
//! line take precedence over the file.

use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, ValueEnum};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Cmd {
    /// Test one dataset (CSV or synthetic model).
    Test,
    /// Reproduce a simulation table.
    Table,
    /// Build a null calibration and store it.
    Calibrate,
    /// Empirical size under a null law.
    Size,
    /// Empirical power against a model.
    Power,
    /// Repeated p-values on a price panel.
    Stocks,
    /// Likelihood-ratio baseline.
    Lrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Subset grid, K = 500.
    Desk,
    /// Full grid, K = 1000.
    Full,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "esdtest",
    version,
    about = "Spectral independence test for high-dimensional data",
    args_override_self = true
)]
pub struct Args {
    #[arg(long, value_enum)]
    pub cmd: Option<Cmd>,
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// iid, cs, ma1, ar1, sma, sar, sec, panel, panel-null, nma, arch, arch-raw, vandermonde.
    #[arg(long)]
    pub model: Option<String>,
    /// normal, gamma or normal_mu1.
    #[arg(long)]
    pub innovation: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub psi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub k_cal: Option<usize>,
    #[arg(long)]
    pub k_eval: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Decay length of the exponential weight density; 0 selects uniform weights.
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// 1-based position of the first sampled observation.
    #[arg(long)]
    pub start: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

/// Outcome of parsing: either arguments or text clap wants printed (help, version).
pub enum Parsed {
    Args(Box<Args>),
    Display(String),
}

/// Parses `argv` (program name first), merging a `--config` file if present.
pub fn parse<I, S>(argv: I) -> Result<Parsed>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let (program, rest) = argv
        .split_first()
        .map(|(a, b)| (a.clone(), b.to_vec()))
        .unwrap_or_default();
    let mut merged = vec![program];
    if let Some(path) = config_path(&rest) {
        merged.extend(config_tokens(Path::new(&path))?);
    }
    merged.extend(rest);
    match Args::try_parse_from(&merged) {
        Ok(a) => Ok(Parsed::Args(Box::new(a))),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                Ok(Parsed::Display(e.to_string()))
            }
            _ => Err(CliError::Usage(e.to_string())),
        },
    }
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

/// Translates a configuration file into long-flag tokens.
pub fn config_tokens(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let cmd = Args::command();
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Parse {
            path: path.display().to_string(),
            line: i as u64 + 1,
            msg,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected key=value, got '{line}'")));
        };
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .filter(|_| key != "config")
            .ok_or_else(|| err(format!("unknown key '{key}'")))?;
        if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            match value {
                "true" | "1" | "yes" => tokens.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => return Err(err(format!("'{key}' takes true or false, got '{value}'"))),
            }
        } else {
            tokens.push(format!("--{key}={value}"));
        }
    }
    Ok(tokens)
}
