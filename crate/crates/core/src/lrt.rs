//! Anderson's likelihood-ratio test of independence with one-dimensional
//! blocks, used as the classical baseline.
//!
//! `L_k = det Q_{1..k} / (det Q_{1..k-1} · Q_kk)` is the `k`-th Cholesky
//! pivot of the centered sample covariance `Q` divided by `Q_kk`, and
//! `-(n - 3/2 - k/2) log L_k` is asymptotically `χ²(k - 1)`. Summing over
//! `k = 2..p` gives a `χ²(p(p-1)/2)` statistic.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::calibrate::{map_indexed, Estimate, Exec, HarnessCell};
use crate::eigcore::DataMatrix;
use crate::error::{Error, Result};
use crate::genmodels::ModelSpec;
use crate::seeds::{self, STREAM_EVALUATION};

/// Relative pivot size below which `Q` is treated as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrtResult {
    /// `Σ_k -(n - 3/2 - k/2) log L_k`; infinite when degenerate.
    pub statistic: f64,
    pub dof: usize,
    pub p_value: Option<f64>,
    pub degenerate: bool,
}

/// Centered sample covariance with divisor `n - 1`, row-major.
fn centered_covariance(x: &[f64], n: usize, p: usize) -> Vec<f64> {
    let centered: Vec<f64> = x
        .chunks_exact(n)
        .flat_map(|col| {
            let m = col.iter().sum::<f64>() / n as f64;
            col.iter().map(move |v| v - m)
        })
        .collect();
    let mut q = vec![0.0; p * p];
    for i in 0..p {
        let ci = &centered[i * n..(i + 1) * n];
        for j in i..p {
            let cj = &centered[j * n..(j + 1) * n];
            let s = ci.iter().zip(cj).map(|(a, b)| a * b).sum::<f64>() / (n - 1) as f64;
            q[i * p + j] = s;
            q[j * p + i] = s;
        }
    }
    q
}

/// Likelihood-ratio statistic for mutual independence of the `p` columns.
pub fn lrt_statistic(x: &DataMatrix) -> Result<LrtResult> {
    let Some(data) = x.as_real() else {
        return Err(Error::InvalidDimensions(
            "the likelihood-ratio baseline needs real data".into(),
        ));
    };
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::InvalidDimensions(
            "the likelihood-ratio baseline needs n >= 2".into(),
        ));
    }
    x.check_finite()?;
    let dof = p * (p - 1) / 2;
    let mut q = centered_covariance(data, n, p);
    let diag: Vec<f64> = (0..p).map(|i| q[i * p + i]).collect();
    let max_diag = diag.iter().copied().fold(0.0f64, f64::max);
    let degenerate_result = LrtResult {
        statistic: f64::INFINITY,
        dof,
        p_value: None,
        degenerate: true,
    };
    if !(max_diag > 0.0) {
        return Ok(degenerate_result);
    }
    let floor = PIVOT_TOLERANCE * max_diag;

    // In-place Cholesky (lower triangle); the pivots are the squared diagonal.
    let mut statistic = 0.0;
    for k in 0..p {
        for j in 0..k {
            let s: f64 = (0..j).map(|m| q[k * p + m] * q[j * p + m]).sum();
            q[k * p + j] = (q[k * p + j] - s) / q[j * p + j];
        }
        let pivot = q[k * p + k] - (0..k).map(|m| q[k * p + m].powi(2)).sum::<f64>();
        if !(pivot > floor) {
            return Ok(degenerate_result);
        }
        q[k * p + k] = pivot.sqrt();
        if k >= 1 {
            let l = (pivot / diag[k]).min(1.0);
            let kk = (k + 1) as f64;
            statistic -= (n as f64 - 1.5 - kk / 2.0) * l.ln();
        }
    }
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive dof")
            .sf(statistic)
    };
    Ok(LrtResult {
        statistic,
        dof,
        p_value: Some(p_value),
        degenerate: false,
    })
}

/// Rejection counts of the baseline over `k` datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LrtSummary {
    /// Rejections among non-degenerate replicates.
    pub rejections: usize,
    pub degenerate: usize,
    pub reps: usize,
}

impl LrtSummary {
    /// Degenerate replicates counted as rejections.
    pub fn collapse(&self) -> Estimate {
        Estimate {
            rejections: self.rejections + self.degenerate,
            reps: self.reps,
        }
    }

    /// Degenerate replicates counted as acceptances.
    pub fn separate(&self) -> Estimate {
        Estimate {
            rejections: self.rejections,
            reps: self.reps,
        }
    }

    pub fn degenerate_fraction(&self) -> f64 {
        self.degenerate as f64 / self.reps as f64
    }

    /// Table cell using the collapse-to-reject convention, with the
    /// degenerate count attached.
    pub fn cell(&self, n: usize, p: usize) -> HarnessCell {
        HarnessCell {
            degenerate: Some(self.degenerate),
            ..HarnessCell::from_estimate(n, p, self.collapse())
        }
    }
}

/// Size or power of the baseline at level `alpha` over `k` datasets of `model`.
pub fn lrt_size_power(
    model: &ModelSpec,
    k: usize,
    alpha: f64,
    seed: u64,
    exec: Exec,
) -> Result<LrtSummary> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    model.validate()?;
    let outcomes: Result<Vec<(bool, bool)>> = map_indexed(exec, k, |r| {
        let x = model.generate(seeds::derive(seed, STREAM_EVALUATION, r as u64))?;
        let res = lrt_statistic(&x)?;
        Ok((res.degenerate, res.p_value.is_some_and(|pv| pv <= alpha)))
    })
    .into_iter()
    .collect();
    let outcomes = outcomes?;
    Ok(LrtSummary {
        rejections: outcomes.iter().filter(|o| o.1).count(),
        degenerate: outcomes.iter().filter(|o| o.0).count(),
        reps: k,
    })
}
