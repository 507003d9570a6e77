//! The test statistic `M_n = ∫ |s_n(t) - s(t, c_n)|² dU(t)` and the
//! two-sided Monte-Carlo decision rule.

use num_complex::Complex64;

use crate::calibrate::NullCalibration;
use crate::eigcore::EigenSpectrum;
use crate::error::{Error, Result};
use crate::mp_law::{mp_charfn_grid, MpParams};
use crate::quadrature::QuadratureRule;

/// Default lower end of the weight interval.
pub const DEFAULT_T1: f64 = 0.0;
/// Default upper end of the weight interval.
pub const DEFAULT_T2: f64 = 1.0;
/// Default decay length of the exponential weight density.
pub const DEFAULT_DECAY: f64 = 0.23;
/// Default number of Gauss–Legendre nodes for both `U` and `s(t)`.
pub const DEFAULT_NODES: usize = 64;

/// Shape of the weight density on `[T1, T2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightShape {
    /// `u(t) = 1/(T2 - T1)`.
    Uniform,
    /// `u(t) ∝ exp(-(t - T1)/τ)`, normalized exactly on `[T1, T2]`.
    Exponential { decay: f64 },
    /// Arbitrary discrete measure given node by node.
    Discrete,
}

/// The probability measure `U` realized as nodes `t_j` and weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMeasure {
    t_lower: f64,
    t_upper: f64,
    shape: WeightShape,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for WeightMeasure {
    fn default() -> Self {
        Self::new(DEFAULT_T1, DEFAULT_T2, DEFAULT_NODES, Some(DEFAULT_DECAY))
            .expect("default weights are valid")
    }
}

impl WeightMeasure {
    /// `U` on `[t1, t2]` with Gauss–Legendre nodes; exponential density with
    /// decay length `decay`, or uniform when `decay` is `None`.
    pub fn new(t1: f64, t2: f64, nodes: usize, decay: Option<f64>) -> Result<Self> {
        if !(t1 < t2) || !t1.is_finite() || !t2.is_finite() {
            return Err(Error::InvalidWeights(format!(
                "need finite T1 < T2, got [{t1}, {t2}]"
            )));
        }
        if nodes < 1 {
            return Err(Error::InvalidWeights(
                "at least one node is required".into(),
            ));
        }
        let rule = QuadratureRule::gauss_legendre(nodes)?.mapped(t1, t2)?;
        let (shape, weights) = match decay {
            None => {
                let norm = 1.0 / (t2 - t1);
                (
                    WeightShape::Uniform,
                    rule.weights().iter().map(|w| w * norm).collect(),
                )
            }
            Some(tau) => {
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(Error::InvalidWeights(format!(
                        "decay must be positive, got {tau}"
                    )));
                }
                let mass = -tau * (-(t2 - t1) / tau).exp_m1();
                let w = rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(&t, &w)| w * (-(t - t1) / tau).exp() / mass)
                    .collect();
                (WeightShape::Exponential { decay: tau }, w)
            }
        };
        Ok(Self {
            t_lower: t1,
            t_upper: t2,
            shape,
            nodes: rule.nodes().to_vec(),
            weights,
        })
    }

    pub fn uniform(t1: f64, t2: f64, nodes: usize) -> Result<Self> {
        Self::new(t1, t2, nodes, None)
    }

    /// A discrete measure; `weights` must be non-negative and sum to 1.
    pub fn discrete(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidWeights(
                "nodes and weights must be non-empty and of equal length".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidWeights(
                "weights must be non-negative and nodes finite".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let t_lower = nodes.iter().copied().fold(f64::INFINITY, f64::min);
        let t_upper = nodes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            t_lower,
            t_upper,
            shape: WeightShape::Discrete,
            nodes,
            weights,
        })
    }

    pub fn t_lower(&self) -> f64 {
        self.t_lower
    }

    pub fn t_upper(&self) -> f64 {
        self.t_upper
    }

    pub fn shape(&self) -> WeightShape {
        self.shape
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights times the density; they sum to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Stable text identifying the measure, used to match calibrations.
    pub fn fingerprint(&self) -> String {
        let shape = match self.shape {
            WeightShape::Uniform => "uniform".to_string(),
            WeightShape::Exponential { decay } => format!("exp{decay:e}"),
            WeightShape::Discrete => {
                let mut h: u64 = 0;
                for (t, w) in self.nodes.iter().zip(&self.weights) {
                    h = crate::seeds::splitmix64(h ^ t.to_bits());
                    h = crate::seeds::splitmix64(h ^ w.to_bits());
                }
                format!("discrete{h:016x}")
            }
        };
        format!(
            "{}:{:e}:{:e}:{}",
            shape,
            self.t_lower,
            self.t_upper,
            self.nodes.len()
        )
    }
}

/// `M_n` and `p² M_n` with the dimensions they came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStatistic {
    pub m_n: f64,
    pub scaled: f64,
    pub n: usize,
    pub p: usize,
}

impl TestStatistic {
    pub fn new(m_n: f64, n: usize, p: usize) -> Self {
        let pf = p as f64;
        Self {
            m_n,
            scaled: pf * pf * m_n,
            n,
            p,
        }
    }

    pub fn c_n(&self) -> f64 {
        self.p as f64 / self.n as f64
    }
}

/// Outcome of the two-sided test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub reject: bool,
    pub statistic: TestStatistic,
    pub lower_crit: f64,
    pub upper_crit: f64,
    pub p_value: Option<f64>,
}

/// Empirical characteristic function `(1/p) Σ e^{itλ_j}` of the spectrum.
pub fn ecf(spectrum: &EigenSpectrum, t: f64) -> Complex64 {
    let values = spectrum.values();
    let (mut re, mut im) = (0.0, 0.0);
    for &l in values {
        let (s, c) = (t * l).sin_cos();
        re += c;
        im += s;
    }
    Complex64::new(re, im) / values.len() as f64
}

/// `Σ_j w_j |a_j - b_j|²`.
pub fn weighted_distance(a: &[Complex64], b: &[Complex64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y).norm_sqr())
        .sum()
}

/// `s(t_j, c_n)` on the nodes of `U`, computed once per `(n, p)` and reused
/// for every spectrum of those dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    n: usize,
    p: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<Complex64>,
}

impl Reference {
    pub fn new(
        n: usize,
        p: usize,
        weights: &WeightMeasure,
        quad_cf: &QuadratureRule,
    ) -> Result<Self> {
        let params = MpParams::for_dims(n, p)?;
        let values = mp_charfn_grid(weights.nodes(), &params, quad_cf)?;
        Ok(Self {
            n,
            p,
            nodes: weights.nodes().to_vec(),
            weights: weights.weights().to_vec(),
            values,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn statistic(&self, spectrum: &EigenSpectrum) -> Result<TestStatistic> {
        if spectrum.n() != self.n || spectrum.p() != self.p {
            return Err(Error::DimensionMismatch {
                expected: format!("n = {}, p = {}", self.n, self.p),
                got: format!("n = {}, p = {}", spectrum.n(), spectrum.p()),
            });
        }
        let sn: Vec<Complex64> = self.nodes.iter().map(|&t| ecf(spectrum, t)).collect();
        let m_n = weighted_distance(&sn, &self.values, &self.weights);
        Ok(TestStatistic::new(m_n, self.n, self.p))
    }
}

/// `M_n` for one spectrum, with `s(·, c_n)` evaluated by `quad_cf`.
pub fn statistic_mn(
    spectrum: &EigenSpectrum,
    weights: &WeightMeasure,
    quad_cf: &QuadratureRule,
) -> Result<TestStatistic> {
    Reference::new(spectrum.n(), spectrum.p(), weights, quad_cf)?.statistic(spectrum)
}

/// Two-sided Monte-Carlo p-value of `observed` against the sorted null sample.
///
/// With `r = #{null ≤ observed}` this is
/// `min(1, 2 min((r + 1)/(K + 1), (K - r + 1)/(K + 1)))`.
pub fn monte_carlo_p_value(sorted_null: &[f64], observed: f64) -> f64 {
    let k = sorted_null.len() as f64;
    let r = sorted_null.partition_point(|&x| x <= observed) as f64;
    let lower = (r + 1.0) / (k + 1.0);
    let upper = (k - r + 1.0) / (k + 1.0);
    (2.0 * lower.min(upper)).min(1.0)
}

/// Rejects when `p² M_n` falls at or beyond either calibrated quantile.
pub fn decide(
    stat: &TestStatistic,
    calib: &NullCalibration,
    weights: &WeightMeasure,
) -> Result<Decision> {
    if calib.n != stat.n || calib.p != stat.p {
        return Err(Error::CalibrationMismatch(format!(
            "statistic has n = {}, p = {} but calibration has n = {}, p = {}",
            stat.n, stat.p, calib.n, calib.p
        )));
    }
    let fp = weights.fingerprint();
    if calib.weight_fingerprint != fp {
        return Err(Error::CalibrationMismatch(format!(
            "weight measure {fp} differs from calibration {}",
            calib.weight_fingerprint
        )));
    }
    Ok(decide_unchecked(stat, calib))
}

pub(crate) fn decide_unchecked(stat: &TestStatistic, calib: &NullCalibration) -> Decision {
    let reject = stat.scaled <= calib.lower_q || stat.scaled >= calib.upper_q;
    Decision {
        reject,
        statistic: *stat,
        lower_crit: calib.lower_q,
        upper_crit: calib.upper_q,
        p_value: Some(monte_carlo_p_value(&calib.sorted_stats, stat.scaled)),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::mp_law::mp_charfn;

    #[test]
    fn ecf_examples() {
        let s = EigenSpectrum::new(vec![0.3, 1.0, 2.5], 10).unwrap();
        assert_eq!(ecf(&s, 0.0), Complex64::new(1.0, 0.0));
        let flat = EigenSpectrum::new(vec![1.7; 4], 10).unwrap();
        let want = Complex64::new(0.0, 0.9 * 1.7).exp();
        assert!((ecf(&flat, 0.9) - want).norm() < 1e-15);
        let two = EigenSpectrum::new(vec![1.0, 2.0], 2).unwrap();
        assert!(ecf(&two, PI).norm() <= 1e-15);
    }

    #[test]
    fn weights_are_probability_measures() {
        let u = WeightMeasure::uniform(0.0, 2.0, 64).unwrap();
        assert!((u.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let e = WeightMeasure::default();
        assert!((e.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(e.nodes().len(), DEFAULT_NODES);
        let shifted = WeightMeasure::new(0.5, 3.0, 64, Some(0.4)).unwrap();
        assert!((shifted.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(WeightMeasure::uniform(1.0, 1.0, 8).is_err());
        assert!(WeightMeasure::new(0.0, 1.0, 8, Some(0.0)).is_err());
        assert!(WeightMeasure::discrete(vec![1.0], vec![0.5]).is_err());
        assert_ne!(u.fingerprint(), e.fingerprint());
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let s = [Complex64::new(0.3, -0.2), Complex64::new(0.9, 0.1)];
        assert_eq!(weighted_distance(&s, &s, &[0.5, 0.5]), 0.0);
    }

    #[test]
    fn single_node_hand_case() {
        let spec = EigenSpectrum::new(vec![0.0, 2.0], 2).unwrap();
        let u = WeightMeasure::discrete(vec![1.0], vec![1.0]).unwrap();
        let q = QuadratureRule::gauss_legendre(64).unwrap();
        let stat = statistic_mn(&spec, &u, &q).unwrap();
        let s11 = mp_charfn(1.0, &MpParams::new(1.0).unwrap(), &q).unwrap();
        let sn = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, 2.0).exp()) / 2.0;
        let want = (sn - s11).norm_sqr();
        assert!((stat.m_n - want).abs() < 1e-15);
        assert_eq!(stat.scaled, 4.0 * stat.m_n);
    }

    fn synthetic_calibration(k: usize) -> NullCalibration {
        let stats: Vec<f64> = (1..=k).map(|x| x as f64).collect();
        NullCalibration::from_stream(stats, 0.05, 10, 5, WeightMeasure::default().fingerprint())
            .unwrap()
    }

    #[test]
    fn decision_rule() {
        let calib = synthetic_calibration(1000);
        let w = WeightMeasure::default();
        let inside = TestStatistic {
            m_n: 0.0,
            scaled: 500.0,
            n: 10,
            p: 5,
        };
        assert!(!decide(&inside, &calib, &w).unwrap().reject);

        let huge = TestStatistic {
            scaled: 1e300,
            ..inside
        };
        let d = decide(&huge, &calib, &w).unwrap();
        assert!(d.reject);
        assert_eq!(d.p_value, Some(2.0 / 1001.0));

        let median = TestStatistic {
            scaled: 500.5,
            ..inside
        };
        let pv = decide(&median, &calib, &w).unwrap().p_value.unwrap();
        assert!((pv - 1.0).abs() <= 2.0 / 1001.0, "{pv}");

        let wrong = TestStatistic { n: 11, ..inside };
        assert!(matches!(
            decide(&wrong, &calib, &w),
            Err(Error::CalibrationMismatch(_))
        ));
        let other = WeightMeasure::uniform(0.0, 2.0, 64).unwrap();
        assert!(matches!(
            decide(&inside, &calib, &other),
            Err(Error::CalibrationMismatch(_))
        ));
    }

    #[test]
    fn decision_is_monotone_in_the_tails() {
        let calib = synthetic_calibration(200);
        let base = TestStatistic {
            m_n: 0.0,
            scaled: 0.0,
            n: 10,
            p: 5,
        };
        let mut rejected = false;
        for s in (0..=4000).map(|k| 150.0 + k as f64 * 0.0125) {
            let r = decide_unchecked(&TestStatistic { scaled: s, ..base }, &calib).reject;
            assert!(!(rejected && !r));
            rejected |= r;
        }
        let mut rejected = false;
        for s in (0..=4000).map(|k| 50.0 - k as f64 * 0.0125) {
            let r = decide_unchecked(&TestStatistic { scaled: s, ..base }, &calib).reject;
            assert!(!(rejected && !r));
            rejected |= r;
        }
    }
}
