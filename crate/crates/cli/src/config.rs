//! Resolved run configuration: defaults applied and every value checked
//! before any command starts.

use std::path::PathBuf;

use esd_indep::calibrate::{quantile_indices, Exec, Harness};
use esd_indep::cf_test::{WeightMeasure, DEFAULT_DECAY, DEFAULT_NODES, DEFAULT_T1, DEFAULT_T2};
use esd_indep::genmodels::{Innovation, ModelKind, ModelSpec, SpatialWeights, USpec};
use esd_indep::quadrature::QuadratureRule;
use sha2::{Digest, Sha256};

use crate::args::{Args, Cmd, Preset};
use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 20_261_016;
pub const DEFAULT_K: usize = 1000;
pub const DEFAULT_STRIDE: usize = 50;
pub const DEFAULT_REPS: usize = 100;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cmd: Cmd,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub model: Option<String>,
    pub innovation: Innovation,
    pub psi: f64,
    pub phi: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub k_cal: usize,
    pub k_eval: usize,
    pub alpha: f64,
    pub t1: f64,
    pub t2: f64,
    pub nodes: usize,
    pub decay: f64,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Preset,
    pub table: Option<String>,
    pub stride: usize,
    pub start: usize,
    pub reps: usize,
    pub standardize: bool,
    pub input: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub weights: WeightMeasure,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl RunConfig {
    pub fn from_args(a: &Args) -> Result<Self> {
        let cmd = a.cmd.ok_or_else(|| usage("--cmd is required"))?;
        let innovation = match &a.innovation {
            Some(s) => {
                Innovation::parse(s).ok_or_else(|| usage(format!("unknown innovation '{s}'")))?
            }
            None => Innovation::Normal,
        };
        let t1 = a.t1.unwrap_or(DEFAULT_T1);
        let t2 = a.t2.unwrap_or(DEFAULT_T2);
        let nodes = a.nodes.unwrap_or(DEFAULT_NODES);
        let decay = a.decay.unwrap_or(DEFAULT_DECAY);
        if !(decay >= 0.0) || !decay.is_finite() {
            return Err(usage(format!("--decay must be >= 0, got {decay}")));
        }
        let weights = WeightMeasure::new(t1, t2, nodes, (decay > 0.0).then_some(decay))?;
        let preset = a.preset.unwrap_or(Preset::Desk);
        let default_k = if cmd == Cmd::Table && preset == Preset::Desk {
            500
        } else {
            DEFAULT_K
        };
        let cfg = Self {
            cmd,
            n: a.n,
            p: a.p,
            model: a.model.clone(),
            innovation,
            psi: a.psi.unwrap_or(0.5),
            phi: a.phi.unwrap_or(0.5),
            alpha0: a.alpha0.unwrap_or(0.9),
            alpha1: a.alpha1.unwrap_or(0.1),
            k_cal: a.k_cal.unwrap_or(default_k),
            k_eval: a.k_eval.unwrap_or(default_k),
            alpha: a.alpha.unwrap_or(0.05),
            t1,
            t2,
            nodes,
            decay,
            seed: a.seed.unwrap_or(DEFAULT_SEED),
            threads: a.threads,
            out: a.out.clone(),
            preset,
            table: a.table.clone(),
            stride: a.stride.unwrap_or(DEFAULT_STRIDE),
            start: a.start.unwrap_or(1),
            reps: a.reps.unwrap_or(DEFAULT_REPS),
            standardize: !a.no_standardize,
            input: a.input.clone(),
            cache_dir: a.cache_dir.clone(),
            weights,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(usage(format!(
                "--alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        quantile_indices(self.k_cal, self.alpha)?;
        if self.k_eval == 0 {
            return Err(usage("--k-eval must be positive"));
        }
        if self.n == Some(0) || self.p == Some(0) {
            return Err(usage("--n and --p must be positive"));
        }
        if self.threads == Some(0) {
            return Err(usage("--threads must be positive"));
        }
        if self.stride == 0 || self.start == 0 || self.reps == 0 {
            return Err(usage("--stride, --start and --reps must be positive"));
        }
        if let Some(m) = &self.model {
            // Dimension-free validation of the coefficients.
            self.model_spec_named(m, 2, 2)?;
        }
        Ok(())
    }

    pub fn require_dims(&self) -> Result<(usize, usize)> {
        match (self.n, self.p) {
            (Some(n), Some(p)) => Ok((n, p)),
            _ => Err(usage(
                format!("--n and --p are required for --cmd {:?}", self.cmd).to_lowercase(),
            )),
        }
    }

    pub fn model_spec(&self, n: usize, p: usize) -> Result<ModelSpec> {
        let name = self.model.as_deref().unwrap_or("iid");
        self.model_spec_named(name, n, p)
    }

    fn model_spec_named(&self, name: &str, n: usize, p: usize) -> Result<ModelSpec> {
        let arch = |squared| ModelKind::Arch1 {
            alpha0: self.alpha0,
            alpha1: self.alpha1,
            squared,
        };
        let (kind, innovation) = match name {
            "iid" => (ModelKind::Iid, self.innovation),
            "cs" => (ModelKind::CompoundSymmetric, self.innovation),
            "ma1" => (ModelKind::Ma1 { psi: self.psi }, self.innovation),
            "ar1" => (ModelKind::Ar1 { phi: self.phi }, self.innovation),
            "sma" => (
                ModelKind::Sma {
                    weights: SpatialWeights::UniformScaled,
                },
                Innovation::NormalMu1,
            ),
            "sar" => (
                ModelKind::Sar {
                    weights: SpatialWeights::UniformScaled,
                },
                Innovation::NormalMu1,
            ),
            "sec" => (
                ModelKind::Sec {
                    weights: SpatialWeights::UniformScaled,
                },
                Innovation::Normal,
            ),
            "panel" => (
                ModelKind::Panel {
                    u: USpec::AltFactor,
                },
                Innovation::Normal,
            ),
            "panel-null" => (
                ModelKind::Panel {
                    u: USpec::NullNormalMu1,
                },
                Innovation::Normal,
            ),
            "nma" => (ModelKind::NonlinearMa, Innovation::Normal),
            "arch" => (arch(true), Innovation::Normal),
            "arch-raw" => (arch(false), Innovation::Normal),
            "vandermonde" => (ModelKind::Vandermonde, Innovation::Normal),
            other => return Err(usage(format!("unknown model '{other}'"))),
        };
        Ok(ModelSpec::new(kind, innovation, n, p)?)
    }

    pub fn harness(&self) -> Harness {
        Harness {
            weights: self.weights.clone(),
            quad_cf: QuadratureRule::gauss_legendre(DEFAULT_NODES).expect("valid rule"),
            alpha: self.alpha,
            exec: Exec::Parallel,
            standardize: false,
        }
    }

    /// Settings that determine the output, excluding thread count and paths
    /// of outputs and caches.
    pub fn canonical(&self) -> String {
        format!(
            "cmd={:?};n={:?};p={:?};model={:?};innovation={};psi={:?};phi={:?};alpha0={:?};alpha1={:?};\
             k_cal={};k_eval={};alpha={:?};weights={};seed={};preset={:?};table={:?};stride={};start={};\
             reps={};standardize={};input={:?}",
            self.cmd,
            self.n,
            self.p,
            self.model,
            self.innovation.name(),
            self.psi,
            self.phi,
            self.alpha0,
            self.alpha1,
            self.k_cal,
            self.k_eval,
            self.alpha,
            self.weights.fingerprint(),
            self.seed,
            self.preset,
            self.table,
            self.stride,
            self.start,
            self.reps,
            self.standardize,
            self.input.as_ref().and_then(|p| p.file_name()).map(|s| s.to_string_lossy().into_owned()),
        )
    }

    pub fn config_hash(&self) -> String {
        hex_digest(self.canonical().as_bytes())[..16].to_string()
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
