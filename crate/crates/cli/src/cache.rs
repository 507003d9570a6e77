//! On-disk store of null calibrations keyed by a fingerprint of everything
//! that determines the null sample.
//!
//! Statistics are stored as the hex bit patterns of the `f64` values, so a
//! loaded calibration equals the computed one exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use esd_indep::calibrate::NullCalibration;

use crate::config::hex_digest;
use crate::error::{CliError, Result};

const MAGIC: &str = "esdtest-calibration v1";

#[derive(Debug, Clone)]
pub struct CalibrationCache {
    dir: PathBuf,
}

impl CalibrationCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir })
    }

    pub fn path_for(&self, fingerprint: &str) -> PathBuf {
        self.dir
            .join(format!("{}.cal", &hex_digest(fingerprint.as_bytes())[..32]))
    }

    /// The stored calibration for `fingerprint`, if present and intact.
    pub fn load(&self, fingerprint: &str) -> Result<Option<NullCalibration>> {
        let path = self.path_for(fingerprint);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        Ok(decode(&text, fingerprint))
    }

    pub fn store(&self, fingerprint: &str, calib: &NullCalibration) -> Result<PathBuf> {
        let path = self.path_for(fingerprint);
        let mut tmp =
            tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        tmp.write_all(encode(fingerprint, calib).as_bytes())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&path)
            .map_err(|e| CliError::io(&path, e.error))?;
        Ok(path)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn encode(fingerprint: &str, c: &NullCalibration) -> String {
    let mut s = format!(
        "{MAGIC}\nfingerprint={fingerprint}\nalpha={:016x}\nn={}\np={}\nweights={}\nk={}\n",
        c.alpha.to_bits(),
        c.n,
        c.p,
        c.weight_fingerprint,
        c.k()
    );
    for v in &c.sorted_stats {
        s.push_str(&format!("{:016x}\n", v.to_bits()));
    }
    s
}

/// `None` for any mismatch or corruption; the caller then recomputes.
fn decode(text: &str, fingerprint: &str) -> Option<NullCalibration> {
    let mut lines = text.lines();
    if lines.next()? != MAGIC {
        return None;
    }
    let mut field = |key: &str| {
        lines
            .next()?
            .strip_prefix(key)?
            .strip_prefix('=')
            .map(str::to_string)
    };
    if field("fingerprint")? != fingerprint {
        return None;
    }
    let alpha = f64::from_bits(u64::from_str_radix(&field("alpha")?, 16).ok()?);
    let n: usize = field("n")?.parse().ok()?;
    let p: usize = field("p")?.parse().ok()?;
    let weights = field("weights")?;
    let k: usize = field("k")?.parse().ok()?;
    let stats: Option<Vec<f64>> = lines
        .map(|l| u64::from_str_radix(l, 16).ok().map(f64::from_bits))
        .collect();
    let stats = stats?;
    if stats.len() != k {
        return None;
    }
    NullCalibration::from_stream(stats, alpha, n, p, weights).ok()
}
