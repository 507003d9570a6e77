use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NUMERIC: i32 = 2;
    pub const REJECTED: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },

    #[error("{0}: no rows")]
    NoRows(String),

    #[error("series for {ticker} has {got} observations, {needed} required")]
    SeriesTooShort {
        ticker: String,
        needed: usize,
        got: usize,
    },

    #[error("series for {0} is constant after subsampling")]
    DegenerateSeries(String),

    #[error("{needed} tickers requested but only {usable} are usable")]
    NotEnoughTickers { needed: usize, usable: usize },

    #[error("unknown table '{0}'")]
    UnknownTable(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] esd_indep::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use esd_indep::Error as E;
        match self {
            CliError::Core(
                E::NonConvergence { .. }
                | E::QuadratureTooCoarse { .. }
                | E::SingularWeights { .. }
                | E::NotPositiveSemidefinite { .. }
                | E::NotHermitian { .. },
            ) => exit::NUMERIC,
            _ => exit::USAGE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
