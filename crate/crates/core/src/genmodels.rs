//! Seeded data generators for the null scenarios and every alternative.
//!
//! All generators follow one stream convention: the primary `n x p`
//! innovation block is drawn first, column-major, from the seeded stream,
//! and any extra innovation vectors come after it. Random weights, burn-in
//! draws and shuffles use a separate auxiliary stream. With degenerate
//! parameters (ψ = 0, φ = 0, W = 0, α₁ = 0 with α₀ = 1, u ≡ 0) the output is
//! therefore bit-identical to [`gen_iid`] with the same seed.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal, Uniform};

use crate::eigcore::{Covariance, DataMatrix};
use crate::error::{Error, Result};
use crate::seeds::{self, Rng};

/// Marginal law of the i.i.d. innovations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Innovation {
    /// Standard normal.
    Normal,
    /// `Gamma(shape 4, rate 2) - 2`: mean 0, variance 1, fourth moment 4.5.
    StdGamma42,
    /// Normal with mean 1 and variance 1.
    NormalMu1,
}

impl Innovation {
    pub fn name(&self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::StdGamma42 => "gamma",
            Innovation::NormalMu1 => "normal_mu1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(Innovation::Normal),
            "gamma" | "std_gamma_4_2" => Some(Innovation::StdGamma42),
            "normal_mu1" => Some(Innovation::NormalMu1),
            _ => None,
        }
    }

    fn fill(&self, rng: &mut Rng, out: &mut Vec<f64>, count: usize) {
        out.reserve(count);
        match self {
            Innovation::Normal => {
                out.extend((0..count).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)))
            }
            Innovation::StdGamma42 => {
                let g = Gamma::new(4.0, 0.5).expect("valid gamma parameters");
                out.extend((0..count).map(|_| g.sample(rng) - 2.0));
            }
            Innovation::NormalMu1 => out.extend(
                (0..count).map(|_| 1.0 + Distribution::<f64>::sample(&StandardNormal, rng)),
            ),
        }
    }

    fn draw(&self, rng: &mut Rng, count: usize) -> Vec<f64> {
        let mut v = Vec::new();
        self.fill(rng, &mut v, count);
        v
    }
}

/// Spatial weight matrix `ω` (`p x p`).
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialWeights {
    /// Entries i.i.d. `U(0, 1) / √p`, drawn afresh for every dataset.
    UniformScaled,
    /// Fixed row-major matrix.
    Fixed(Vec<f64>),
}

impl SpatialWeights {
    fn realize(&self, p: usize, aux: &mut Rng) -> Result<Vec<f64>> {
        match self {
            SpatialWeights::UniformScaled => {
                let scale = 1.0 / (p as f64).sqrt();
                let u = Uniform::new(0.0, 1.0).expect("valid range");
                Ok((0..p * p).map(|_| u.sample(aux) * scale).collect())
            }
            SpatialWeights::Fixed(w) => {
                if w.len() != p * p {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{p}x{p} weight matrix"),
                        got: format!("{} entries", w.len()),
                    });
                }
                Ok(w.clone())
            }
        }
    }
}

/// Law of the panel-model factor `u`.
#[derive(Debug, Clone, PartialEq)]
pub enum USpec {
    /// `u_i` i.i.d. normal with mean 1, variance 1.
    NullNormalMu1,
    /// `u ~ N(1_p, T Tᵀ)` with `T` entries i.i.d. `U(0, 1)`.
    AltFactor,
    /// A fixed vector.
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Iid,
    CompoundSymmetric,
    Ma1 {
        psi: f64,
    },
    Ar1 {
        phi: f64,
    },
    Sma {
        weights: SpatialWeights,
    },
    Sar {
        weights: SpatialWeights,
    },
    Sec {
        weights: SpatialWeights,
    },
    Panel {
        u: USpec,
    },
    NonlinearMa,
    Arch1 {
        alpha0: f64,
        alpha1: f64,
        squared: bool,
    },
    Vandermonde,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Iid => "iid",
            ModelKind::CompoundSymmetric => "cs",
            ModelKind::Ma1 { .. } => "ma1",
            ModelKind::Ar1 { .. } => "ar1",
            ModelKind::Sma { .. } => "sma",
            ModelKind::Sar { .. } => "sar",
            ModelKind::Sec { .. } => "sec",
            ModelKind::Panel {
                u: USpec::NullNormalMu1,
            } => "panel_null",
            ModelKind::Panel { .. } => "panel",
            ModelKind::NonlinearMa => "nma",
            ModelKind::Arch1 { .. } => "arch",
            ModelKind::Vandermonde => "vandermonde",
        }
    }
}

/// A data-generating process with its dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub innovation: Innovation,
    pub n: usize,
    pub p: usize,
}

/// The law used to calibrate the test for a given model.
#[derive(Debug, Clone, PartialEq)]
pub enum NullModel {
    /// i.i.d. real entries.
    Iid(Innovation),
    /// i.i.d. complex entries `e^{-iθ}`, `θ ~ U[0, 2π)`.
    UnitPhase,
    /// Panel model with `u_i ~ N(1, 1)`.
    Panel,
    /// ARCH(1) data whose columns are independently permuted across rows,
    /// keeping the marginal law and removing dependence between columns.
    ShuffledArch {
        alpha0: f64,
        alpha1: f64,
        squared: bool,
    },
}

impl NullModel {
    pub fn name(&self) -> String {
        match self {
            NullModel::Iid(i) => format!("iid_{}", i.name()),
            NullModel::UnitPhase => "unit_phase".into(),
            NullModel::Panel => "panel_null".into(),
            NullModel::ShuffledArch {
                alpha0,
                alpha1,
                squared,
            } => {
                format!(
                    "shuffled_arch_{alpha0}_{alpha1}_{}",
                    if *squared { "sq" } else { "raw" }
                )
            }
        }
    }

    /// How the spectrum is formed from a generated matrix.
    pub fn covariance(&self) -> Covariance {
        Covariance::Sample
    }

    pub fn generate(&self, n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
        match self {
            NullModel::Iid(innovation) => gen_iid(n, p, *innovation, seed),
            NullModel::UnitPhase => gen_unit_phase(n, p, seed),
            NullModel::Panel => gen_panel(n, p, &USpec::NullNormalMu1, seed).map(|(x, _)| x),
            NullModel::ShuffledArch {
                alpha0,
                alpha1,
                squared,
            } => {
                let mut x = gen_arch1(n, p, *alpha0, *alpha1, *squared, seed)?;
                shuffle_columns(&mut x, seed);
                Ok(x)
            }
        }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind, innovation: Innovation, n: usize, p: usize) -> Result<Self> {
        let spec = Self {
            kind,
            innovation,
            n,
            p,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidDimensions(format!(
                "n = {}, p = {}",
                self.n, self.p
            )));
        }
        match &self.kind {
            ModelKind::Ma1 { psi } => check_unit(*psi, "psi"),
            ModelKind::Ar1 { phi } => check_unit(*phi, "phi"),
            ModelKind::Arch1 { alpha0, alpha1, .. } => check_arch(*alpha0, *alpha1),
            _ => Ok(()),
        }
    }

    pub fn covariance(&self) -> Covariance {
        match self.kind {
            ModelKind::Vandermonde => Covariance::Gram,
            _ => Covariance::Sample,
        }
    }

    /// The null law this model is calibrated against.
    pub fn null_model(&self) -> NullModel {
        match &self.kind {
            ModelKind::Iid
            | ModelKind::CompoundSymmetric
            | ModelKind::Ma1 { .. }
            | ModelKind::Ar1 { .. }
            | ModelKind::NonlinearMa => NullModel::Iid(self.innovation),
            ModelKind::Sma { .. } | ModelKind::Sar { .. } | ModelKind::Sec { .. } => {
                NullModel::Iid(Innovation::Normal)
            }
            ModelKind::Panel { .. } => NullModel::Panel,
            ModelKind::Arch1 {
                alpha0,
                alpha1,
                squared,
            } => NullModel::ShuffledArch {
                alpha0: *alpha0,
                alpha1: *alpha1,
                squared: *squared,
            },
            ModelKind::Vandermonde => NullModel::UnitPhase,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<DataMatrix> {
        let (n, p, inn) = (self.n, self.p, self.innovation);
        match &self.kind {
            ModelKind::Iid => gen_iid(n, p, inn, seed),
            ModelKind::CompoundSymmetric => gen_compound_symmetric(n, p, inn, seed),
            ModelKind::Ma1 { psi } => gen_ma1_with(n, p, *psi, inn, seed),
            ModelKind::Ar1 { phi } => gen_ar1_with(n, p, *phi, inn, seed),
            ModelKind::Sma { weights } => gen_sma(n, p, weights, inn, seed),
            ModelKind::Sar { weights } => gen_sar(n, p, weights, inn, seed),
            ModelKind::Sec { weights } => gen_sec(n, p, weights, seed),
            ModelKind::Panel { u } => gen_panel(n, p, u, seed).map(|(x, _)| x),
            ModelKind::NonlinearMa => gen_nonlinear_ma(n, p, seed),
            ModelKind::Arch1 {
                alpha0,
                alpha1,
                squared,
            } => gen_arch1(n, p, *alpha0, *alpha1, *squared, seed),
            ModelKind::Vandermonde => gen_vandermonde(n, p, seed),
        }
    }
}

fn check_unit(x: f64, name: &str) -> Result<()> {
    if x.is_finite() && x.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::BadCoefficient(format!(
            "|{name}| must be < 1, got {x}"
        )))
    }
}

fn check_arch(alpha0: f64, alpha1: f64) -> Result<()> {
    if !(alpha0 > 0.0) || !alpha0.is_finite() {
        return Err(Error::BadCoefficient(format!(
            "alpha0 must be > 0, got {alpha0}"
        )));
    }
    if !(0.0..1.0).contains(&alpha1) {
        return Err(Error::BadCoefficient(format!(
            "alpha1 must lie in [0, 1), got {alpha1}"
        )));
    }
    Ok(())
}

fn streams(seed: u64) -> (Rng, Rng) {
    (
        seeds::rng_from(seed),
        seeds::rng_from(seeds::derive(seed, seeds::STREAM_AUX, 0)),
    )
}

/// i.i.d. entries from `innovation`.
pub fn gen_iid(n: usize, p: usize, innovation: Innovation, seed: u64) -> Result<DataMatrix> {
    let mut rng = seeds::rng_from(seed);
    DataMatrix::real(n, p, innovation.draw(&mut rng, n * p))
}

/// i.i.d. complex entries `e^{-iθ}`, `θ ~ U[0, 2π)`: `E z² = 0`, `E|z|⁴ = 1`.
pub fn gen_unit_phase(n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = seeds::rng_from(seed);
    let u = Uniform::new(0.0, TAU).expect("valid range");
    let data = (0..n * p)
        .map(|_| {
            let (s, c) = u.sample(&mut rng).sin_cos();
            Complex64::new(c, -s)
        })
        .collect();
    DataMatrix::complex(n, p, data)
}

/// Rows `y = w T^{1/2}` with `T^{1/2} = (√0.95 I_p, √0.05 1_p)`, giving
/// `Σ = 0.95 I + 0.05 11ᵀ`.
pub fn gen_compound_symmetric(
    n: usize,
    p: usize,
    innovation: Innovation,
    seed: u64,
) -> Result<DataMatrix> {
    let mut rng = seeds::rng_from(seed);
    let mut w = innovation.draw(&mut rng, n * p);
    let common = innovation.draw(&mut rng, n);
    let (a, b) = (0.95f64.sqrt(), 0.05f64.sqrt());
    for col in w.chunks_exact_mut(n) {
        for (x, z) in col.iter_mut().zip(&common) {
            *x = a * *x + b * z;
        }
    }
    DataMatrix::real(n, p, w)
}

/// MA(1) across columns: `v_t = z_t + ψ z_{t-1}`, `t = 1..p`, normal innovations.
pub fn gen_ma1(n: usize, p: usize, psi: f64, seed: u64) -> Result<DataMatrix> {
    gen_ma1_with(n, p, psi, Innovation::Normal, seed)
}

pub fn gen_ma1_with(
    n: usize,
    p: usize,
    psi: f64,
    innovation: Innovation,
    seed: u64,
) -> Result<DataMatrix> {
    check_unit(psi, "psi")?;
    let mut rng = seeds::rng_from(seed);
    let z = innovation.draw(&mut rng, n * p);
    let z0 = innovation.draw(&mut rng, n);
    let mut v = vec![0.0; n * p];
    for t in 0..p {
        let prev = if t == 0 {
            &z0[..]
        } else {
            &z[(t - 1) * n..t * n]
        };
        for i in 0..n {
            v[t * n + i] = z[t * n + i] + psi * prev[i];
        }
    }
    DataMatrix::real(n, p, v)
}

/// AR(1) across columns: `v_t = φ v_{t-1} + z_t` from the stationary start
/// `v_0 = z_0 / √(1 - φ²)`, normal innovations.
pub fn gen_ar1(n: usize, p: usize, phi: f64, seed: u64) -> Result<DataMatrix> {
    gen_ar1_with(n, p, phi, Innovation::Normal, seed)
}

pub fn gen_ar1_with(
    n: usize,
    p: usize,
    phi: f64,
    innovation: Innovation,
    seed: u64,
) -> Result<DataMatrix> {
    check_unit(phi, "phi")?;
    let mut rng = seeds::rng_from(seed);
    let mut v = innovation.draw(&mut rng, n * p);
    let z0 = innovation.draw(&mut rng, n);
    let scale = 1.0 / (1.0 - phi * phi).sqrt();
    let mut prev: Vec<f64> = z0.iter().map(|z| z * scale).collect();
    for col in v.chunks_exact_mut(n) {
        for (x, pv) in col.iter_mut().zip(prev.iter_mut()) {
            *x += phi * *pv;
            *pv = *x;
        }
    }
    DataMatrix::real(n, p, v)
}

/// Spatial moving average: `v_ji = ε_ji + Σ_k ω_ik ε_jk`.
pub fn gen_sma(
    n: usize,
    p: usize,
    weights: &SpatialWeights,
    innovation: Innovation,
    seed: u64,
) -> Result<DataMatrix> {
    let (mut rng, mut aux) = streams(seed);
    let eps = innovation.draw(&mut rng, n * p);
    let w = weights.realize(p, &mut aux)?;
    let mut v = eps.clone();
    add_weighted(&mut v, &eps, &w, n, p);
    DataMatrix::real(n, p, v)
}

/// Spatial autoregression: each row solves `(ω - I) v_j = ε_j`.
pub fn gen_sar(
    n: usize,
    p: usize,
    weights: &SpatialWeights,
    innovation: Innovation,
    seed: u64,
) -> Result<DataMatrix> {
    let (mut rng, mut aux) = streams(seed);
    let eps = innovation.draw(&mut rng, n * p);
    let mut m = weights.realize(p, &mut aux)?;
    (0..p).for_each(|i| m[i * p + i] -= 1.0);
    let lu = Lu::factor(&m, p)?;
    let mut v = vec![0.0; n * p];
    let mut rhs = vec![0.0; p];
    let mut worst = 0.0f64;
    for j in 0..n {
        (0..p).for_each(|i| rhs[i] = eps[i * n + j]);
        let x = lu.solve(&rhs);
        let scale = rhs
            .iter()
            .fold(0.0f64, |a, b| a.max(b.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..p {
            let r: f64 = (0..p).map(|k| m[i * p + k] * x[k]).sum::<f64>() - rhs[i];
            worst = worst.max(r.abs() / scale);
        }
        (0..p).for_each(|i| v[i * n + j] = x[i]);
    }
    if !(worst <= 1e-8) {
        return Err(Error::SingularWeights { residual: worst });
    }
    DataMatrix::real(n, p, v)
}

/// Spatial error components: `v_ji = ε_ji + Σ_k ω_ik ξ_jk` with independent
/// standard normal `ε`, `ξ`.
pub fn gen_sec(n: usize, p: usize, weights: &SpatialWeights, seed: u64) -> Result<DataMatrix> {
    let (mut rng, mut aux) = streams(seed);
    let mut v = Innovation::Normal.draw(&mut rng, n * p);
    let xi = Innovation::Normal.draw(&mut rng, n * p);
    let w = weights.realize(p, &mut aux)?;
    add_weighted(&mut v, &xi, &w, n, p);
    DataMatrix::real(n, p, v)
}

/// `out[:, i] += Σ_k w[i][k] src[:, k]` for column-major `n x p` blocks.
fn add_weighted(out: &mut [f64], src: &[f64], w: &[f64], n: usize, p: usize) {
    for i in 0..p {
        let col = &mut out[i * n..(i + 1) * n];
        for k in 0..p {
            let c = w[i * p + k];
            if c != 0.0 {
                let s = &src[k * n..(k + 1) * n];
                col.iter_mut().zip(s).for_each(|(o, x)| *o += c * x);
            }
        }
    }
}

/// Panel model `v_ij = ε_ij + u_i / √p`, emitted as the `n x p` matrix whose
/// column `i` is the vector `v_i`. Also returns `u`.
pub fn gen_panel(n: usize, p: usize, u: &USpec, seed: u64) -> Result<(DataMatrix, Vec<f64>)> {
    let (mut rng, mut aux) = streams(seed);
    let mut v = Innovation::Normal.draw(&mut rng, n * p);
    let u = match u {
        USpec::NullNormalMu1 => Innovation::NormalMu1.draw(&mut rng, p),
        USpec::AltFactor => {
            let z = Innovation::Normal.draw(&mut rng, p);
            let unif = Uniform::new(0.0, 1.0).expect("valid range");
            let t: Vec<f64> = (0..p * p).map(|_| unif.sample(&mut aux)).collect();
            (0..p)
                .map(|i| 1.0 + (0..p).map(|k| t[i * p + k] * z[k]).sum::<f64>())
                .collect()
        }
        USpec::Fixed(u) => {
            if u.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: format!("{p} factors"),
                    got: format!("{}", u.len()),
                });
            }
            u.clone()
        }
    };
    let scale = 1.0 / (p as f64).sqrt();
    for (col, &ui) in v.chunks_exact_mut(n).zip(&u) {
        let shift = ui * scale;
        col.iter_mut().for_each(|x| *x += shift);
    }
    Ok((DataMatrix::real(n, p, v)?, u))
}

/// `(1/p²) Σ_{i≠j} (u_i² - ū)(u_j² - ū)`.
pub fn panel_condition(u: &[f64], ubar: f64) -> f64 {
    let p = u.len() as f64;
    let (s, s2) = u.iter().fold((0.0, 0.0), |(s, s2), x| {
        let d = x * x - ubar;
        (s + d, s2 + d * d)
    });
    (s * s - s2) / (p * p)
}

/// Nonlinear MA: `R_t = Z_{t-1} Z_{t-2} (Z_{t-2} + Z_t + 1)` for `t = 1..p`.
pub fn gen_nonlinear_ma(n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = seeds::rng_from(seed);
    let z = Innovation::Normal.draw(&mut rng, n * p);
    let pre = Innovation::Normal.draw(&mut rng, 2 * n);
    Ok(nonlinear_ma_from(n, p, &z, &pre))
}

/// `z` holds `Z_1..Z_p` column-major, `pre` holds `Z_{-1}` then `Z_0`.
fn nonlinear_ma_from(n: usize, p: usize, z: &[f64], pre: &[f64]) -> DataMatrix {
    // Index k = t + 1 over Z_{-1}, Z_0, Z_1, ...
    let col = |k: usize| -> &[f64] {
        if k < 2 {
            &pre[k * n..(k + 1) * n]
        } else {
            &z[(k - 2) * n..(k - 1) * n]
        }
    };
    let mut r = vec![0.0; n * p];
    for t in 0..p {
        let (z2, z1, z0) = (col(t), col(t + 1), col(t + 2));
        for i in 0..n {
            r[t * n + i] = z1[i] * z2[i] * (z2[i] + z0[i] + 1.0);
        }
    }
    DataMatrix::real(n, p, r).expect("dimensions checked by caller")
}

/// Burn-in steps before the emitted ARCH(1) window.
pub const ARCH_BURN_IN: usize = 200;

/// ARCH(1) along each row: `W_t = Z_t √(α₀ + α₁ W²_{t-1})`, emitted for
/// `t = 1..p` after [`ARCH_BURN_IN`] steps started from `N(0, α₀/(1-α₁))`.
/// With `squared` the squares `W²` are emitted.
pub fn gen_arch1(
    n: usize,
    p: usize,
    alpha0: f64,
    alpha1: f64,
    squared: bool,
    seed: u64,
) -> Result<DataMatrix> {
    check_arch(alpha0, alpha1)?;
    let (mut rng, mut aux) = streams(seed);
    let mut w = Innovation::Normal.draw(&mut rng, n * p);
    let sd0 = (alpha0 / (1.0 - alpha1)).sqrt();
    let mut prev: Vec<f64> = (0..n)
        .map(|_| sd0 * aux.sample::<f64, _>(StandardNormal))
        .collect();
    for _ in 0..ARCH_BURN_IN {
        for pv in prev.iter_mut() {
            let z: f64 = aux.sample(StandardNormal);
            *pv = z * (alpha0 + alpha1 * *pv * *pv).sqrt();
        }
    }
    for col in w.chunks_exact_mut(n) {
        for (x, pv) in col.iter_mut().zip(prev.iter_mut()) {
            *x *= (alpha0 + alpha1 * *pv * *pv).sqrt();
            *pv = *x;
        }
    }
    if squared {
        w.iter_mut().for_each(|x| *x *= *x);
    }
    DataMatrix::real(n, p, w)
}

/// Permutes every column independently across rows (auxiliary stream).
fn shuffle_columns(x: &mut DataMatrix, seed: u64) {
    use rand::seq::SliceRandom;
    let mut aux = seeds::rng_from(seeds::derive(seed, seeds::STREAM_AUX, 1));
    let n = x.n();
    let p = x.p();
    let mut data = match x.entries() {
        crate::eigcore::Entries::Real(v) => v.clone(),
        crate::eigcore::Entries::Complex(_) => unreachable!("ARCH data is real"),
    };
    data.chunks_exact_mut(n)
        .for_each(|col| col.shuffle(&mut aux));
    *x = DataMatrix::real(n, p, data).expect("same shape");
}

/// Random-phase Vandermonde matrix `V_kj = e^{-i(k-1)ω_j} / √n`,
/// `ω_j ~ U[0, 2π)`. Its Gram matrix `V^H V` plays the role of `A_n`.
pub fn gen_vandermonde(n: usize, p: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = seeds::rng_from(seed);
    let u = Uniform::new(0.0, TAU).expect("valid range");
    let omegas: Vec<f64> = (0..p).map(|_| u.sample(&mut rng)).collect();
    Ok(vandermonde_from(n, &omegas))
}

pub fn vandermonde_from(n: usize, omegas: &[f64]) -> DataMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    let data = omegas
        .iter()
        .flat_map(|&w| {
            (0..n).map(move |k| {
                let (s, c) = (k as f64 * w).sin_cos();
                Complex64::new(c * scale, -s * scale)
            })
        })
        .collect();
    DataMatrix::complex(n, omegas.len(), data).expect("dimensions match")
}

/// LU factorization with partial pivoting of a dense row-major matrix.
struct Lu {
    lu: Vec<f64>,
    perm: Vec<usize>,
    dim: usize,
}

impl Lu {
    fn factor(a: &[f64], dim: usize) -> Result<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..dim).collect();
        let norm = a
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        for k in 0..dim {
            let piv = (k..dim)
                .max_by(|&i, &j| lu[i * dim + k].abs().total_cmp(&lu[j * dim + k].abs()))
                .expect("non-empty range");
            if lu[piv * dim + k].abs() <= f64::EPSILON * norm {
                return Err(Error::SingularWeights {
                    residual: f64::INFINITY,
                });
            }
            if piv != k {
                for c in 0..dim {
                    lu.swap(k * dim + c, piv * dim + c);
                }
                perm.swap(k, piv);
            }
            let d = lu[k * dim + k];
            for i in k + 1..dim {
                let f = lu[i * dim + k] / d;
                lu[i * dim + k] = f;
                for c in k + 1..dim {
                    lu[i * dim + c] -= f * lu[k * dim + c];
                }
            }
        }
        Ok(Self { lu, perm, dim })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..d {
            let s: f64 = (0..i).map(|k| self.lu[i * d + k] * y[k]).sum();
            y[i] -= s;
        }
        for i in (0..d).rev() {
            let s: f64 = (i + 1..d).map(|k| self.lu[i * d + k] * y[k]).sum();
            y[i] = (y[i] - s) / self.lu[i * d + i];
        }
        y
    }
}
