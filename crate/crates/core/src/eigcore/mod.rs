//! Data matrices, sample covariance construction and the dense
//! symmetric/Hermitian eigenvalue engine.
//!
//! A [`DataMatrix`] stores `n` observations of `p` vectors column-major, one
//! column per vector under test. The sample covariance is the uncentered
//! `(1/n) X* X`; nothing in this module subtracts means.

mod symtri;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Whether a matrix carries real or complex scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

/// Scalar storage shared by data and square matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Entries {
    pub fn len(&self) -> usize {
        match self {
            Entries::Real(v) => v.len(),
            Entries::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn field(&self) -> Field {
        match self {
            Entries::Real(_) => Field::Real,
            Entries::Complex(_) => Field::Complex,
        }
    }
}

/// `n x p` panel of observations; column `j` is the `j`-th vector under test.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    entries: Entries,
}

impl DataMatrix {
    /// Real matrix from column-major data.
    pub fn real(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(n, p, Entries::Real(data))
    }

    /// Complex matrix from column-major data.
    pub fn complex(n: usize, p: usize, data: Vec<Complex64>) -> Result<Self> {
        Self::new(n, p, Entries::Complex(data))
    }

    pub fn new(n: usize, p: usize, entries: Entries) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidDimensions(format!(
                "n = {n}, p = {p}; both must be >= 1"
            )));
        }
        if entries.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", n * p),
                got: format!("{} entries", entries.len()),
            });
        }
        Ok(Self { n, p, entries })
    }

    /// Real matrix from observation rows (each of length `p`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: format!("{p} columns"),
                got: format!("{} columns in row {}", r.len(), i + 1),
            });
        }
        let mut data = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                data[j * n + i] = x;
            }
        }
        Self::real(n, p, data)
    }

    pub fn zeros(n: usize, p: usize) -> Result<Self> {
        Self::real(n, p, vec![0.0; n * p])
    }

    /// Number of observations per vector.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of vectors.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn field(&self) -> Field {
        self.entries.field()
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn into_entries(self) -> Entries {
        self.entries
    }

    /// Column-major real data, `None` for complex matrices.
    pub fn as_real(&self) -> Option<&[f64]> {
        match &self.entries {
            Entries::Real(v) => Some(v),
            Entries::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match &self.entries {
            Entries::Complex(v) => Some(v),
            Entries::Real(_) => None,
        }
    }

    /// Entry `(row, col)` promoted to complex.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let k = col * self.n + row;
        match &self.entries {
            Entries::Real(v) => Complex64::new(v[k], 0.0),
            Entries::Complex(v) => v[k],
        }
    }

    /// Rejects NaN and infinite entries.
    pub fn check_finite(&self) -> Result<()> {
        let bad = match &self.entries {
            Entries::Real(v) => v.iter().position(|x| !x.is_finite()),
            Entries::Complex(v) => v.iter().position(|x| !x.is_finite()),
        };
        match bad {
            Some(k) => Err(Error::NonFinite {
                row: k % self.n,
                col: k / self.n,
            }),
            None => Ok(()),
        }
    }

    /// New matrix whose column `j` is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p || perm.iter().any(|&j| j >= self.p) {
            return Err(Error::DimensionMismatch {
                expected: format!("permutation of 0..{}", self.p),
                got: format!("{perm:?}"),
            });
        }
        let n = self.n;
        let entries = match &self.entries {
            Entries::Real(v) => Entries::Real(
                perm.iter()
                    .flat_map(|&j| v[j * n..(j + 1) * n].iter().copied())
                    .collect(),
            ),
            Entries::Complex(v) => Entries::Complex(
                perm.iter()
                    .flat_map(|&j| v[j * n..(j + 1) * n].iter().copied())
                    .collect(),
            ),
        };
        Self::new(n, self.p, entries)
    }

    /// Multiplies column `col` by `factor` in place.
    pub fn scale_column(&mut self, col: usize, factor: f64) {
        let n = self.n;
        match &mut self.entries {
            Entries::Real(v) => v[col * n..(col + 1) * n]
                .iter_mut()
                .for_each(|x| *x *= factor),
            Entries::Complex(v) => v[col * n..(col + 1) * n]
                .iter_mut()
                .for_each(|x| *x *= factor),
        }
    }

    /// Centers every real column at its sample mean and scales it to unit
    /// sample standard deviation (divisor `n - 1`).
    pub fn standardize_columns(&mut self) -> Result<()> {
        let n = self.n;
        let Entries::Real(v) = &mut self.entries else {
            return Err(Error::InvalidDimensions(
                "column standardization needs real data".into(),
            ));
        };
        if n < 2 {
            return Err(Error::InvalidDimensions(
                "standardization needs n >= 2".into(),
            ));
        }
        for (col, column) in v.chunks_exact_mut(n).enumerate() {
            let mean = column.iter().sum::<f64>() / n as f64;
            let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let sd = var.sqrt();
            if !(sd > f64::EPSILON * mean.abs().max(1.0)) {
                return Err(Error::DegenerateSeries { col });
            }
            column.iter_mut().for_each(|x| *x = (*x - mean) / sd);
        }
        Ok(())
    }
}

/// Dense `dim x dim` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Entries,
    hermitian: bool,
}

impl SquareMatrix {
    pub fn real(dim: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(dim, Entries::Real(data))
    }

    pub fn complex(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        Self::new(dim, Entries::Complex(data))
    }

    /// Builds the matrix and sets the Hermitian flag from a tolerance check.
    pub fn new(dim: usize, entries: Entries) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimensions(
                "square matrix of dimension 0".into(),
            ));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", dim * dim),
                got: format!("{} entries", entries.len()),
            });
        }
        let mut m = Self {
            dim,
            entries,
            hermitian: false,
        };
        m.hermitian = m.hermitian_deviation() <= m.hermitian_tolerance();
        Ok(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &x) in diag.iter().enumerate() {
            data[i * dim + i] = x;
        }
        Self::real(dim, data)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::from_diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let k = row * self.dim + col;
        match &self.entries {
            Entries::Real(v) => Complex64::new(v[k], 0.0),
            Entries::Complex(v) => v[k],
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match &self.entries {
            Entries::Real(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Entries::Complex(v) => v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `self + shift * I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        let d = self.dim;
        match &mut out.entries {
            Entries::Real(v) => (0..d).for_each(|i| v[i * d + i] += shift),
            Entries::Complex(v) => (0..d).for_each(|i| v[i * d + i] += shift),
        }
        out
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..i {
                let dev = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(dev);
            }
            worst = worst.max(self.get(i, i).im.abs());
        }
        worst
    }

    fn hermitian_tolerance(&self) -> f64 {
        1e-12 * self.frobenius_norm().max(1.0)
    }
}

/// How a data matrix is turned into the matrix whose spectrum is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Covariance {
    /// `(1/n) X* X`.
    Sample,
    /// `X* X`, for data that already carries the `1/√n` factor.
    Gram,
}

/// Sorted eigenvalues of a sample covariance matrix with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl EigenSpectrum {
    /// Wraps precomputed eigenvalues; they are sorted ascending here.
    pub fn new(mut values: Vec<f64>, n: usize) -> Result<Self> {
        if values.is_empty() || n == 0 {
            return Err(Error::InvalidDimensions(
                "spectrum needs p >= 1 values and n >= 1".into(),
            ));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidDimensions(
                "spectrum contains non-finite values".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        let p = values.len();
        Ok(Self { values, n, p })
    }

    /// Spectrum of a positive semidefinite covariance built from `n`
    /// observations. Values in `[-eps, 0)` are clipped to zero, with
    /// `eps = 1e-9 * max(1, ||A||_F)`; anything below `-eps` is an error.
    pub fn from_covariance(a: &SquareMatrix, n: usize) -> Result<Self> {
        let values = match a.entries() {
            Entries::Real(_) => eigenvalues_sym(a)?,
            Entries::Complex(_) => eigenvalues_herm(a)?,
        };
        let eps = psd_tolerance(a);
        Self::from_psd_values(values, eps, n)
    }

    fn from_psd_values(mut values: Vec<f64>, eps: f64, n: usize) -> Result<Self> {
        if let Some(&lowest) = values.first() {
            if lowest < -eps {
                return Err(Error::NotPositiveSemidefinite {
                    value: lowest,
                    tolerance: eps,
                });
            }
        }
        for v in values.iter_mut().filter(|v| **v < 0.0) {
            *v = 0.0;
        }
        Self::new(values, n)
    }

    /// Spectrum of `(1/n) X* X`.
    pub fn of_data(x: &DataMatrix) -> Result<Self> {
        Self::from_covariance(&sample_covariance(x), x.n())
    }

    /// Spectrum of `(1/n) X* X` or of `X* X`.
    pub fn of_data_with(x: &DataMatrix, covariance: Covariance) -> Result<Self> {
        let a = match covariance {
            Covariance::Sample => sample_covariance(x),
            Covariance::Gram => gram(x),
        };
        Self::from_covariance(&a, x.n())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Finite-sample aspect ratio `p / n`.
    pub fn ratio(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Empirical spectral distribution evaluated at `x`.
    pub fn esd(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.p as f64
    }
}

fn psd_tolerance(a: &SquareMatrix) -> f64 {
    1e-9 * a.frobenius_norm().max(1.0)
}

/// The uncentered sample covariance `(1/n) X* X` (`p x p`, Hermitian).
pub fn sample_covariance(x: &DataMatrix) -> SquareMatrix {
    let mut a = gram(x);
    let inv_n = 1.0 / x.n() as f64;
    match &mut a.entries {
        Entries::Real(v) => v.iter_mut().for_each(|z| *z *= inv_n),
        Entries::Complex(v) => v.iter_mut().for_each(|z| *z *= inv_n),
    }
    a
}

/// The Gram matrix `X* X` without normalization.
pub fn gram(x: &DataMatrix) -> SquareMatrix {
    let (n, p) = (x.n(), x.p());
    let entries = match x.entries() {
        Entries::Real(v) => {
            let mut out = vec![0.0; p * p];
            for i in 0..p {
                let ci = &v[i * n..(i + 1) * n];
                for j in i..p {
                    let cj = &v[j * n..(j + 1) * n];
                    let s: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                    out[i * p + j] = s;
                    out[j * p + i] = s;
                }
            }
            Entries::Real(out)
        }
        Entries::Complex(v) => {
            let mut out = vec![Complex64::new(0.0, 0.0); p * p];
            for i in 0..p {
                let ci = &v[i * n..(i + 1) * n];
                for j in i..p {
                    let cj = &v[j * n..(j + 1) * n];
                    let s: Complex64 = ci.iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
                    out[i * p + j] = s;
                    out[j * p + i] = s.conj();
                }
                out[i * p + i].im = 0.0;
            }
            Entries::Complex(out)
        }
    };
    SquareMatrix {
        dim: p,
        entries,
        hermitian: true,
    }
}

/// All eigenvalues of a real symmetric matrix, ascending.
pub fn eigenvalues_sym(a: &SquareMatrix) -> Result<Vec<f64>> {
    let Entries::Real(data) = a.entries() else {
        return Err(Error::InvalidDimensions(
            "eigenvalues_sym needs a real matrix".into(),
        ));
    };
    if !a.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: a.hermitian_deviation(),
        });
    }
    symmetric_eigenvalues(data.clone(), a.dim())
}

/// All eigenvalues of a complex Hermitian matrix, ascending.
///
/// The matrix is embedded as the real symmetric `[[Re A, -Im A], [Im A, Re A]]`
/// of size `2p`, whose spectrum is that of `A` with every value doubled; every
/// second value of the sorted embedded spectrum is returned.
pub fn eigenvalues_herm(a: &SquareMatrix) -> Result<Vec<f64>> {
    let data = match a.entries() {
        Entries::Real(_) => return eigenvalues_sym(a),
        Entries::Complex(v) => v,
    };
    if !a.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: a.hermitian_deviation(),
        });
    }
    let embedded = real_embedding(data, a.dim());
    let doubled = symmetric_eigenvalues(embedded, 2 * a.dim())?;
    Ok(doubled.into_iter().step_by(2).collect())
}

/// Sorted eigenvalues of the real `2p x 2p` embedding of a Hermitian matrix.
pub fn embedded_eigenvalues(a: &SquareMatrix) -> Result<Vec<f64>> {
    let Entries::Complex(data) = a.entries() else {
        return Err(Error::InvalidDimensions(
            "embedding needs a complex matrix".into(),
        ));
    };
    symmetric_eigenvalues(real_embedding(data, a.dim()), 2 * a.dim())
}

fn real_embedding(data: &[Complex64], p: usize) -> Vec<f64> {
    let m = 2 * p;
    let mut out = vec![0.0; m * m];
    for i in 0..p {
        for j in 0..p {
            let z = data[i * p + j];
            out[i * m + j] = z.re;
            out[i * m + (j + p)] = -z.im;
            out[(i + p) * m + j] = z.im;
            out[(i + p) * m + (j + p)] = z.re;
        }
    }
    out
}

fn symmetric_eigenvalues(mut data: Vec<f64>, dim: usize) -> Result<Vec<f64>> {
    let (mut d, mut e) = symtri::tridiagonalize(&mut data, dim);
    symtri::tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}
