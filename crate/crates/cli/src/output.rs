//! CSV emission with a leading `#` metadata block.

use std::io::Write;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Table whose metadata starts with the run provenance.
    pub fn for_run(cfg: &RunConfig, header: &[&str]) -> Self {
        let meta = vec![
            (
                "tool".to_string(),
                format!("esdtest {}", env!("CARGO_PKG_VERSION")),
            ),
            ("cmd".to_string(), format!("{:?}", cfg.cmd).to_lowercase()),
            ("seed".to_string(), cfg.seed.to_string()),
            ("config_hash".to_string(), cfg.config_hash()),
            ("weights".to_string(), cfg.weights.fingerprint()),
        ];
        Self {
            meta,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (k, v) in &self.meta {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row)?;
        }
        csv.flush()
    }

    /// Writes to `path`, or to standard output when `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => {
                let file = std::fs::File::create(p).map_err(|e| CliError::io(p, e))?;
                self.write_to(std::io::BufWriter::new(file))
                    .map_err(|e| CliError::io(p, e))
            }
            None => quiet_pipe(self.write_to(std::io::stdout().lock())),
        }
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Prints one line to standard output.
pub fn say(line: &str) -> Result<()> {
    quiet_pipe(writeln!(std::io::stdout().lock(), "{line}"))
}

/// A closed downstream pipe is not an error for a command-line filter.
fn quiet_pipe(r: std::io::Result<()>) -> Result<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other.map_err(|e| CliError::io("<stdout>", e)),
    }
}
