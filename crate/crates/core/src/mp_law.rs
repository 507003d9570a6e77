//! The Marčenko–Pastur law with population covariance `I`: support,
//! density, characteristic function, moments and Stieltjes transforms.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Largest tolerated change of `s(t)` when the quadrature is doubled.
pub const CHARFN_TOLERANCE: f64 = 1e-8;

/// M-P law with ratio `c`: edges `a`, `b` and the atom at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpParams {
    c: f64,
    a: f64,
    b: f64,
    atom: f64,
}

impl MpParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::NonPositiveRatio(c));
        }
        let (a, b) = mp_support(c)?;
        let atom = if c > 1.0 { 1.0 - 1.0 / c } else { 0.0 };
        Ok(Self { c, a, b, atom })
    }

    /// Law for the finite-sample ratio `p / n`.
    pub fn for_dims(n: usize, p: usize) -> Result<Self> {
        Self::new(p as f64 / n as f64)
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lower_edge(&self) -> f64 {
        self.a
    }

    pub fn upper_edge(&self) -> f64 {
        self.b
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn radius(&self) -> f64 {
        0.5 * (self.b - self.a)
    }
}

/// Edges `((1 - √c)², (1 + √c)²)` of the continuous part.
pub fn mp_support(c: f64) -> Result<(f64, f64)> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonPositiveRatio(c));
    }
    let s = c.sqrt();
    Ok(((1.0 - s).powi(2), (1.0 + s).powi(2)))
}

/// Continuous density at `x`; the atom is not included.
pub fn mp_density(x: f64, params: &MpParams) -> f64 {
    let (a, b) = (params.a, params.b);
    if !(x > a && x < b) || x <= 0.0 {
        return 0.0;
    }
    ((b - x) * (x - a)).sqrt() / (2.0 * PI * params.c * x)
}

/// `s(t) = ∫ e^{itx} dF^c(x)` including the atom.
///
/// With `x = m + r sin θ` the density times `dx` becomes
/// `r² cos²θ / (2πc x) dθ`, and `r² cos²θ / x = 2m - x - ab/x`. The `1/x`
/// piece is split as `(e^{itx} - 1)/x + 1/x`, whose second part integrates
/// to `π/√(ab)` in closed form, leaving only bounded integrands even when
/// `c = 1`.
///
/// The rule (on any interval) is remapped to `[-π/2, π/2]` and the result is
/// compared against the doubled rule.
pub fn mp_charfn(t: f64, params: &MpParams, quad: &QuadratureRule) -> Result<Complex64> {
    let theta = theta_rule(quad)?;
    let coarse = charfn_on(t, params, &theta);
    let fine = charfn_on(t, params, &theta.doubled());
    let difference = (coarse - fine).norm();
    if !(difference <= CHARFN_TOLERANCE) {
        return Err(Error::QuadratureTooCoarse { difference });
    }
    Ok(coarse)
}

/// `mp_charfn` over a grid of arguments.
pub fn mp_charfn_grid(
    ts: &[f64],
    params: &MpParams,
    quad: &QuadratureRule,
) -> Result<Vec<Complex64>> {
    let theta = theta_rule(quad)?;
    let fine = theta.doubled();
    ts.iter()
        .map(|&t| {
            let coarse = charfn_on(t, params, &theta);
            let difference = (coarse - charfn_on(t, params, &fine)).norm();
            if difference <= CHARFN_TOLERANCE {
                Ok(coarse)
            } else {
                Err(Error::QuadratureTooCoarse { difference })
            }
        })
        .collect()
}

fn theta_rule(quad: &QuadratureRule) -> Result<QuadratureRule> {
    if quad.len() < 2 {
        return Err(Error::InvalidQuadrature(
            "characteristic function needs at least two nodes".into(),
        ));
    }
    quad.mapped(-FRAC_PI_2, FRAC_PI_2)
}

fn charfn_on(t: f64, params: &MpParams, theta: &QuadratureRule) -> Complex64 {
    let (m, r) = (params.mid(), params.radius());
    let ab = params.a * params.b;
    let mut smooth = Complex64::new(0.0, 0.0);
    let mut singular = Complex64::new(0.0, 0.0);
    for (&th, &w) in theta.nodes().iter().zip(theta.weights()) {
        let x = m + r * th.sin();
        let (s, c) = (t * x).sin_cos();
        smooth += w * (2.0 * m - x) * Complex64::new(c, s);
        if ab > 0.0 {
            // (e^{itx} - 1)/x without cancellation.
            let h = (0.5 * t * x).sin();
            singular += w * Complex64::new(-2.0 * h * h / x, s / x);
        }
    }
    let continuous = (smooth - ab * singular - PI * ab.sqrt()) / (2.0 * PI * params.c);
    continuous + params.atom
}

/// `∫ x^k dF^c(x)` for `k` in `1..=4`; the atom contributes nothing.
pub fn mp_moments(params: &MpParams, k: u32) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidQuadrature(format!(
            "moment order {k} outside 1..=4"
        )));
    }
    // x^(k-1) times a polynomial in sin θ: 16 nodes are exact.
    let theta = QuadratureRule::gauss_legendre(16)?.mapped(-FRAC_PI_2, FRAC_PI_2)?;
    let (m, r) = (params.mid(), params.radius());
    let total = theta.integrate(|th| {
        let x = m + r * th.sin();
        x.powi(k as i32 - 1) * r * r * th.cos().powi(2)
    });
    Ok(total / (2.0 * PI * params.c))
}

/// Stieltjes transform `m(z) = ∫ dF^c(λ)/(λ - z)` for `Im z > 0`.
pub fn mp_stieltjes(z: Complex64, c: f64) -> Result<Complex64> {
    if !(z.im > 0.0) {
        return Err(Error::LowerHalfPlane(z.im));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::NonPositiveRatio(c));
    }
    let b = 1.0 - c - z;
    let root = (b * b - 4.0 * c * z).sqrt();
    let denom = 2.0 * c * z;
    let m = (b + root) / denom;
    if m.im > 0.0 {
        Ok(m)
    } else {
        Ok((b - root) / denom)
    }
}

/// Companion transform `m̲(z) = -(1 - c)/z + c·m(z)`, the Stieltjes transform
/// of the `n x n` matrix `X X* / n`.
pub fn underline_stieltjes(z: Complex64, c: f64) -> Result<Complex64> {
    let m = mp_stieltjes(z, c)?;
    Ok(-(1.0 - c) / z + c * m)
}

/// Inverse of `m̲` for population spectrum `δ₁`: `z = -1/m̲ + c/(1 + m̲)`.
pub fn inverse_underline(mu: Complex64, c: f64) -> Complex64 {
    -1.0 / mu + c / (1.0 + mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl(n: usize) -> QuadratureRule {
        QuadratureRule::gauss_legendre(n).unwrap()
    }

    #[test]
    fn support_examples() {
        assert_eq!(mp_support(1.0).unwrap(), (0.0, 4.0));
        assert_eq!(mp_support(0.25).unwrap(), (0.25, 2.25));
        assert_eq!(mp_support(4.0).unwrap(), (1.0, 9.0));
        assert_eq!(mp_support(0.0), Err(Error::NonPositiveRatio(0.0)));
        assert!(mp_support(f64::NAN).is_err());
    }

    #[test]
    fn params_atom() {
        assert_eq!(MpParams::new(0.5).unwrap().atom(), 0.0);
        assert_eq!(MpParams::new(1.0).unwrap().atom(), 0.0);
        assert!((MpParams::new(2.0).unwrap().atom() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_examples() {
        let p = MpParams::new(1.0).unwrap();
        assert_eq!(mp_density(5.0, &p), 0.0);
        assert_eq!(mp_density(4.0, &p), 0.0);
        let q = MpParams::new(0.25).unwrap();
        let want = (1.25f64 * 0.75).sqrt() / (2.0 * PI * 0.25);
        assert!((mp_density(1.0, &q) - want).abs() < 1e-15);
        assert!((want - 0.61640).abs() < 5e-6);
    }

    #[test]
    fn charfn_at_zero_is_one() {
        for c in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let s = mp_charfn(0.0, &MpParams::new(c).unwrap(), &gl(64)).unwrap();
            assert!((s - 1.0).norm() < 1e-13, "c = {c}: {s}");
        }
    }

    #[test]
    fn charfn_axioms() {
        let p = MpParams::new(1.0).unwrap();
        let s = mp_charfn(0.7, &p, &gl(64)).unwrap();
        let r = mp_charfn(-0.7, &p, &gl(64)).unwrap();
        assert!(s.norm() <= 1.0);
        assert_eq!(r, s.conj());
    }

    #[test]
    fn coarse_rule_is_reported() {
        let p = MpParams::new(1.0).unwrap();
        assert!(matches!(
            mp_charfn(40.0, &p, &gl(4)),
            Err(Error::QuadratureTooCoarse { .. })
        ));
        assert!(matches!(
            mp_charfn(1.0, &p, &gl(1)),
            Err(Error::InvalidQuadrature(_))
        ));
    }

    #[test]
    fn moments() {
        for c in [0.5, 1.0, 2.0] {
            let p = MpParams::new(c).unwrap();
            assert!((mp_moments(&p, 1).unwrap() - 1.0).abs() < 1e-12);
            assert!((mp_moments(&p, 2).unwrap() - (1.0 + c)).abs() < 1e-12);
            // Third and fourth moments: 1 + 3c + c², 1 + 6c + 6c² + c³.
            assert!((mp_moments(&p, 3).unwrap() - (1.0 + 3.0 * c + c * c)).abs() < 1e-12);
            assert!(
                (mp_moments(&p, 4).unwrap() - (1.0 + 6.0 * c + 6.0 * c * c + c * c * c)).abs()
                    < 1e-11
            );
        }
        assert!(mp_moments(&MpParams::new(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn stieltjes_examples() {
        let m = mp_stieltjes(Complex64::new(0.0, 10.0), 1.0).unwrap();
        assert!(m.im > 0.0 && m.norm() <= 0.1);

        let z = Complex64::new(1.0, 1.0);
        let c = 0.5;
        let m = mp_stieltjes(z, c).unwrap();
        let residual = (m - 1.0 / (1.0 - c - c * z * m - z)).norm();
        assert!(residual < 1e-10, "{residual}");

        assert_eq!(
            mp_stieltjes(Complex64::new(1.0, 0.0), 1.0),
            Err(Error::LowerHalfPlane(0.0))
        );
    }

    #[test]
    fn underline_examples() {
        let z = Complex64::new(0.3, 0.8);
        assert_eq!(
            underline_stieltjes(z, 1.0).unwrap(),
            mp_stieltjes(z, 1.0).unwrap()
        );

        let z = Complex64::new(1.0, 1.0);
        let mu = underline_stieltjes(z, 0.5).unwrap();
        assert!((inverse_underline(mu, 0.5) - z).norm() < 1e-8);

        assert!(
            underline_stieltjes(Complex64::new(0.0, 5.0), 2.0)
                .unwrap()
                .im
                > 0.0
        );
    }
}
