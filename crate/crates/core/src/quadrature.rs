//! One-dimensional quadrature rules on a finite interval.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    GaussLegendre,
    Trapezoid,
}

/// Nodes and weights for `∫_lo^hi f(x) dx ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: RuleKind,
    lo: f64,
    hi: f64,
    /// Number of equal panels the base rule was replicated over.
    panels: usize,
}

impl QuadratureRule {
    /// `n`-point Gauss–Legendre rule on `[-1, 1]`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidQuadrature(
                "Gauss-Legendre needs at least one node".into(),
            ));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess for the i-th largest root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self {
            nodes,
            weights,
            kind: RuleKind::GaussLegendre,
            lo: -1.0,
            hi: 1.0,
            panels: 1,
        })
    }

    /// `n`-point composite trapezoid rule on `[-1, 1]` (endpoints included).
    pub fn trapezoid(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidQuadrature(
                "trapezoid rule needs at least two nodes".into(),
            ));
        }
        let h = 2.0 / (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| if i == n - 1 { 1.0 } else { -1.0 + h * i as f64 })
            .collect();
        let mut weights = vec![h; n];
        weights[0] = h / 2.0;
        weights[n - 1] = h / 2.0;
        Ok(Self {
            nodes,
            weights,
            kind: RuleKind::Trapezoid,
            lo: -1.0,
            hi: 1.0,
            panels: 1,
        })
    }

    pub fn new(kind: RuleKind, n: usize) -> Result<Self> {
        match kind {
            RuleKind::GaussLegendre => Self::gauss_legendre(n),
            RuleKind::Trapezoid => Self::trapezoid(n),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Nodes per panel of the underlying base rule.
    pub fn base_len(&self) -> usize {
        match self.kind {
            RuleKind::GaussLegendre => self.len() / self.panels,
            RuleKind::Trapezoid => (self.len() - 1) / self.panels + 1,
        }
    }

    /// The same rule affinely mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidQuadrature(format!(
                "interval [{lo}, {hi}] is empty or unbounded"
            )));
        }
        let scale = (hi - lo) / (self.hi - self.lo);
        let mut nodes: Vec<f64> = self
            .nodes
            .iter()
            .map(|&x| lo + (x - self.lo) * scale)
            .collect();
        if self.kind == RuleKind::Trapezoid {
            nodes[0] = lo;
            *nodes.last_mut().unwrap() = hi;
        }
        let weights = self.weights.iter().map(|w| w * scale).collect();
        Ok(Self {
            nodes,
            weights,
            kind: self.kind,
            lo,
            hi,
            panels: self.panels,
        })
    }

    /// Twice the resolution on the same interval: the base rule is applied on
    /// twice as many equal panels.
    pub fn doubled(&self) -> Self {
        let base = Self::new(self.kind, self.base_len()).expect("base rule was valid");
        let panels = 2 * self.panels;
        let width = (self.hi - self.lo) / panels as f64;
        let mut nodes = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for k in 0..panels {
            let a = self.lo + width * k as f64;
            let b = if k == panels - 1 { self.hi } else { a + width };
            let panel = base.mapped(a, b).expect("panel interval is non-empty");
            let skip_first = self.kind == RuleKind::Trapezoid && k > 0;
            for (i, (&x, &w)) in panel.nodes.iter().zip(&panel.weights).enumerate() {
                if skip_first && i == 0 {
                    *weights.last_mut().unwrap() += w;
                } else {
                    nodes.push(x);
                    weights.push(w);
                }
            }
        }
        Self {
            nodes,
            weights,
            kind: self.kind,
            lo: self.lo,
            hi: self.hi,
            panels,
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
