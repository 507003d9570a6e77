//! Monte-Carlo null calibration, order-statistic critical values and the
//! empirical size/power harness.
//!
//! Replicate `r` of a stream always uses the seed `derive(base, stream, r)`
//! and results are gathered in replicate order, so every output is
//! bit-identical whatever the number of worker threads.

use crate::cf_test::{Reference, TestStatistic, WeightMeasure, DEFAULT_NODES};
use crate::eigcore::{Covariance, DataMatrix, EigenSpectrum};
use crate::error::{Error, Result};
use crate::genmodels::{gen_panel, panel_condition, ModelSpec, NullModel, USpec};
use crate::quadrature::QuadratureRule;
use crate::seeds::{self, STREAM_CALIBRATION, STREAM_EVALUATION};

/// Execution strategy for replicate loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Rayon data parallelism; sequential when the `parallel` feature is off.
    #[default]
    Parallel,
}

/// `f(0), …, f(k-1)` in index order.
pub fn map_indexed<T, F>(exec: Exec, k: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..k).map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..k).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Exec::Parallel => (0..k).map(f).collect(),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers (global pool when `None`).
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// 1-based ranks `(K·α/2, K + 1 - K·α/2)` of the lower and upper critical
/// values, with floor semantics.
pub fn quantile_indices(k: usize, alpha: f64) -> Result<(usize, usize)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let j = (k as f64 * alpha / 2.0).floor() as usize;
    if j < 1 {
        let needed = (2.0 / alpha).ceil() as usize;
        return Err(Error::InsufficientReplicates {
            got: k,
            needed,
            alpha,
        });
    }
    Ok((j, k + 1 - j))
}

/// Sorted null sample of `p² M_n` with its critical values.
#[derive(Debug, Clone, PartialEq)]
pub struct NullCalibration {
    pub sorted_stats: Vec<f64>,
    pub lower_q: f64,
    pub upper_q: f64,
    pub alpha: f64,
    pub n: usize,
    pub p: usize,
    pub weight_fingerprint: String,
}

impl NullCalibration {
    pub fn from_stream(
        mut stats: Vec<f64>,
        alpha: f64,
        n: usize,
        p: usize,
        weight_fingerprint: String,
    ) -> Result<Self> {
        let (lo, hi) = quantile_indices(stats.len(), alpha)?;
        if stats.iter().any(|x| x.is_nan()) {
            return Err(Error::CalibrationMismatch(
                "null sample contains NaN".into(),
            ));
        }
        stats.sort_by(f64::total_cmp);
        Ok(Self {
            lower_q: stats[lo - 1],
            upper_q: stats[hi - 1],
            sorted_stats: stats,
            alpha,
            n,
            p,
            weight_fingerprint,
        })
    }

    pub fn k(&self) -> usize {
        self.sorted_stats.len()
    }

    pub fn rejects(&self, scaled: f64) -> bool {
        scaled <= self.lower_q || scaled >= self.upper_q
    }
}

/// Rejection count out of a number of replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimate {
    pub rejections: usize,
    pub reps: usize,
}

impl Estimate {
    pub fn value(&self) -> f64 {
        self.rejections as f64 / self.reps as f64
    }
}

/// One `(n, p)` cell of a size or power table.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessCell {
    pub n: usize,
    pub p: usize,
    pub estimate: f64,
    pub rejections: usize,
    pub reps: usize,
    /// Replicates with a singular covariance (likelihood-ratio baseline only).
    pub degenerate: Option<usize>,
    /// Mean panel-condition value over the calibration draws (panel model only).
    pub diagnostic: Option<f64>,
}

impl HarnessCell {
    pub fn from_estimate(n: usize, p: usize, e: Estimate) -> Self {
        Self {
            n,
            p,
            estimate: e.value(),
            rejections: e.rejections,
            reps: e.reps,
            degenerate: None,
            diagnostic: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessReport {
    pub cells: Vec<HarnessCell>,
    pub reps: usize,
    pub seed: u64,
}

/// Configuration shared by calibration and evaluation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Harness {
    pub weights: WeightMeasure,
    pub quad_cf: QuadratureRule,
    pub alpha: f64,
    pub exec: Exec,
    /// Standardize every column (mean 0, sd 1) before forming the spectrum.
    pub standardize: bool,
}

impl Default for Harness {
    fn default() -> Self {
        Self {
            weights: WeightMeasure::default(),
            quad_cf: QuadratureRule::gauss_legendre(DEFAULT_NODES).expect("valid rule"),
            alpha: 0.05,
            exec: Exec::default(),
            standardize: false,
        }
    }
}

impl Harness {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn reference(&self, n: usize, p: usize) -> Result<Reference> {
        Reference::new(n, p, &self.weights, &self.quad_cf)
    }

    /// `p² M_n` of one dataset.
    pub fn statistic(
        &self,
        x: &DataMatrix,
        covariance: Covariance,
        reference: &Reference,
    ) -> Result<TestStatistic> {
        let spectrum = if self.standardize {
            let mut y = x.clone();
            y.standardize_columns()?;
            EigenSpectrum::of_data_with(&y, covariance)?
        } else {
            EigenSpectrum::of_data_with(x, covariance)?
        };
        reference.statistic(&spectrum)
    }

    /// Scaled statistics of `k` datasets drawn by `gen(seed)` on `stream`.
    #[allow(clippy::too_many_arguments)]
    pub fn statistics<G>(
        &self,
        n: usize,
        p: usize,
        covariance: Covariance,
        k: usize,
        seed: u64,
        stream: u64,
        gen: G,
    ) -> Result<Vec<f64>>
    where
        G: Fn(u64) -> Result<DataMatrix> + Sync + Send,
    {
        let reference = self.reference(n, p)?;
        map_indexed(self.exec, k, |r| {
            let x = gen(seeds::derive(seed, stream, r as u64))?;
            Ok(self.statistic(&x, covariance, &reference)?.scaled)
        })
        .into_iter()
        .collect()
    }

    /// Calibrates from `k` datasets of the null law.
    pub fn simulate_null(
        &self,
        n: usize,
        p: usize,
        null: &NullModel,
        k: usize,
        seed: u64,
    ) -> Result<NullCalibration> {
        quantile_indices(k, self.alpha)?;
        let stats = self.statistics(n, p, null.covariance(), k, seed, STREAM_CALIBRATION, |s| {
            null.generate(n, p, s)
        })?;
        NullCalibration::from_stream(stats, self.alpha, n, p, self.weights.fingerprint())
    }

    /// Rejections of `calib` over a sample of scaled statistics.
    pub fn count_rejections(calib: &NullCalibration, stats: &[f64]) -> Estimate {
        Estimate {
            rejections: stats.iter().filter(|&&s| calib.rejects(s)).count(),
            reps: stats.len(),
        }
    }

    /// Empirical size: `k_eval` fresh null datasets against a calibration
    /// drawn from an independent stream.
    pub fn empirical_size(
        &self,
        n: usize,
        p: usize,
        null: &NullModel,
        k_cal: usize,
        k_eval: usize,
        seed: u64,
    ) -> Result<Estimate> {
        let calib = self.simulate_null(n, p, null, k_cal, seed)?;
        let stats = self.statistics(
            n,
            p,
            null.covariance(),
            k_eval,
            seed,
            STREAM_EVALUATION,
            |s| null.generate(n, p, s),
        )?;
        Ok(Self::count_rejections(&calib, &stats))
    }

    /// Empirical power of the alternative `model`, calibrated on its null law.
    pub fn empirical_power(
        &self,
        model: &ModelSpec,
        k_cal: usize,
        k_eval: usize,
        seed: u64,
    ) -> Result<Estimate> {
        model.validate()?;
        let calib = self.simulate_null(model.n, model.p, &model.null_model(), k_cal, seed)?;
        self.power_against(model, &calib, k_eval, seed)
    }

    /// Power of `model` against an existing calibration.
    pub fn power_against(
        &self,
        model: &ModelSpec,
        calib: &NullCalibration,
        k_eval: usize,
        seed: u64,
    ) -> Result<Estimate> {
        let stats = self.statistics(
            model.n,
            model.p,
            model.covariance(),
            k_eval,
            seed,
            STREAM_EVALUATION,
            |s| model.generate(s),
        )?;
        Ok(Self::count_rejections(calib, &stats))
    }

    /// Decision for one dataset against a calibration.
    pub fn test(
        &self,
        x: &DataMatrix,
        covariance: Covariance,
        calib: &NullCalibration,
    ) -> Result<crate::cf_test::Decision> {
        let stat = self.statistic(x, covariance, &self.reference(x.n(), x.p())?)?;
        crate::cf_test::decide(&stat, calib, &self.weights)
    }
}

/// Mean of the panel condition `(1/p²) Σ_{i≠j}(u_i² - ū)(u_j² - ū)` with
/// `ū = 2` over `k` null-mode factor draws.
pub fn panel_diagnostic(exec: Exec, p: usize, k: usize, seed: u64) -> Result<f64> {
    let vals: Result<Vec<f64>> = map_indexed(exec, k, |r| {
        let (_, u) = gen_panel(
            1,
            p,
            &USpec::NullNormalMu1,
            seeds::derive(seed, STREAM_CALIBRATION, r as u64),
        )?;
        Ok(panel_condition(&u, 2.0))
    })
    .into_iter()
    .collect();
    let vals = vals?;
    Ok(vals.iter().sum::<f64>() / vals.len().max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodels::{Innovation, ModelKind};

    #[test]
    fn quantile_indices_at_common_k() {
        assert_eq!(quantile_indices(1000, 0.05).unwrap(), (25, 976));
        assert_eq!(quantile_indices(500, 0.05).unwrap(), (12, 489));
        assert_eq!(
            quantile_indices(30, 0.05),
            Err(Error::InsufficientReplicates {
                got: 30,
                needed: 40,
                alpha: 0.05
            })
        );
        assert!(matches!(
            quantile_indices(100, 1.5),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn order_statistics_of_streams() {
        let c = NullCalibration::from_stream(
            (1..=1000).rev().map(|x| x as f64).collect(),
            0.05,
            1,
            1,
            String::new(),
        )
        .unwrap();
        assert_eq!((c.lower_q, c.upper_q), (25.0, 976.0));
        let flat = NullCalibration::from_stream(vec![3.5; 200], 0.05, 1, 1, String::new()).unwrap();
        assert_eq!((flat.lower_q, flat.upper_q), (3.5, 3.5));
    }

    #[test]
    fn self_calibration_rejects_alpha() {
        let h = Harness::default();
        let null = NullModel::Iid(Innovation::Normal);
        let calib = h.simulate_null(20, 10, &null, 1000, 5).unwrap();
        let same = h
            .statistics(
                20,
                10,
                Covariance::Sample,
                1000,
                5,
                STREAM_CALIBRATION,
                |s| null.generate(20, 10, s),
            )
            .unwrap();
        let e = Harness::count_rejections(&calib, &same);
        assert!((e.value() - 0.05).abs() <= 2.0 / 1000.0, "{}", e.value());
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let model = ModelSpec::new(ModelKind::Ma1 { psi: 0.5 }, Innovation::Normal, 15, 6).unwrap();
        let seq = Harness::default().with_exec(Exec::Sequential);
        let par = Harness::default().with_exec(Exec::Parallel);
        let a = seq
            .simulate_null(15, 6, &model.null_model(), 80, 3)
            .unwrap();
        let b = with_threads(Some(3), || {
            par.simulate_null(15, 6, &model.null_model(), 80, 3)
                .unwrap()
        });
        assert_eq!(a, b);
        let pa = seq.empirical_power(&model, 80, 60, 9).unwrap();
        let pb = par.empirical_power(&model, 80, 60, 9).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn null_power_is_size() {
        let h = Harness::default();
        let model = ModelSpec::new(ModelKind::Iid, Innovation::Normal, 30, 20).unwrap();
        let e = h.empirical_power(&model, 400, 400, 1).unwrap();
        assert!(e.value() < 0.12, "{}", e.value());
    }
}
