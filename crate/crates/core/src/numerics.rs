//! Small complex linear-algebra kernel.
//!
//! Every matrix the optimizers touch is a scaled identity plus a handful of
//! rank-1 Hermitian terms, so besides a dense [`HermitianMat`] the kernel
//! offers [`LowRankHermitian`], which applies and inverts in `O(N k)` via the
//! Woodbury identity. Dominant eigenpairs come from power iteration on an
//! arbitrary linear operator.

use std::fmt;
use std::ops::Index;

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `| ||v|| - 1 |` for vectors that are meant to be unit-norm.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("vector is empty")]
    Empty,
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("matrix is not Hermitian: |M - M^H| = {deviation:e} at ({row}, {col})")]
    NotHermitian { row: usize, col: usize, deviation: f64 },
    #[error("quadratic form has non-negligible imaginary part {imag:e} (real part {real:e})")]
    ComplexQuadraticForm { real: f64, imag: f64 },
    #[error("matrix is not positive definite: pivot {index} has value {pivot:e}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("singular system: pivot {index} has magnitude {magnitude:e}")]
    Singular { index: usize, magnitude: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

/// Column vector in `C^N`.
#[derive(Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<Complex64>) -> Result<Self, NumericsError> {
        if entries.is_empty() {
            return Err(NumericsError::Empty);
        }
        if let Some(i) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumericsError::NonFinite(i));
        }
        Ok(Self(entries))
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> Complex64) -> Self {
        Self((0..len).map(f).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![ZERO; len])
    }

    /// `k`-th canonical basis vector.
    pub fn basis(len: usize, k: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Hermitian inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    /// `|self^H other|^2`.
    pub fn projection_power(&self, other: &Self) -> f64 {
        self.dot(other).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: Complex64, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(Complex64::conj).collect())
    }

    pub fn normalized(&self) -> Result<Self, NumericsError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(NumericsError::ZeroVector);
        }
        Ok(self.scale_real(1.0 / n))
    }

    /// Rotates the global phase so that the first entry is real and
    /// non-negative. A zero first entry leaves the vector unchanged.
    pub fn phase_normalized(&self) -> Self {
        let first = self.0[0];
        let mag = first.norm();
        if mag == 0.0 {
            return self.clone();
        }
        self.scale(first.conj() / mag)
    }

    /// Rotates the global phase of `self` to best align with `reference`.
    pub fn phase_aligned_to(&self, reference: &Self) -> Self {
        let c = self.dot(reference);
        let mag = c.norm();
        if mag == 0.0 {
            return self.clone();
        }
        self.scale(c / mag)
    }

    /// Distance to `other` after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &Self) -> f64 {
        self.phase_aligned_to(other).sub(other).norm()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl fmt::Debug for ComplexVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl From<ComplexVec> for Vec<Complex64> {
    fn from(v: ComplexVec) -> Self {
        v.0
    }
}

/// Dense Hermitian matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct HermitianMat {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMat {
    /// Builds from row-major entries, checking Hermitian symmetry to
    /// `1e-12 * max|M_ij|`.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self, NumericsError> {
        if data.len() != dim * dim {
            return Err(NumericsError::DimensionMismatch { expected: dim * dim, actual: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumericsError::NonFinite(i));
        }
        let max_abs = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let bound = 1e-12 * max_abs;
        for r in 0..dim {
            for c in r..dim {
                let dev = (data[r * dim + c] - data[c * dim + r].conj()).norm();
                if dev > bound {
                    return Err(NumericsError::NotHermitian { row: r, col: c, deviation: dev });
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self, NumericsError> {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self::from_row_major(dim, data)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(s, 0.0);
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    /// Rank-1 matrix `w * u u^H`.
    pub fn outer(u: &ComplexVec, w: f64) -> Self {
        let dim = u.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(u[r] * u[c].conj() * w);
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &ComplexVec) -> Result<ComplexVec, NumericsError> {
        check_dim(self.dim, v.len())?;
        Ok(ComplexVec::from_fn(self.dim, |r| {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            row.iter().zip(v.iter()).fold(ZERO, |acc, (m, x)| acc + m * x)
        }))
    }
}

impl fmt::Debug for HermitianMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex64]> = self.data.chunks(self.dim).collect();
        f.debug_struct("HermitianMat").field("dim", &self.dim).field("rows", &rows).finish()
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<(), NumericsError> {
    if expected != actual {
        return Err(NumericsError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Real part of a Hermitian form after checking the imaginary residue is
/// within `1e-9 |Re| + 1e-12`.
fn real_form(z: Complex64) -> Result<f64, NumericsError> {
    if z.im.abs() > 1e-9 * z.re.abs() + 1e-12 {
        return Err(NumericsError::ComplexQuadraticForm { real: z.re, imag: z.im });
    }
    Ok(z.re)
}

/// `v^H M v` as a real number.
pub fn quadratic_form(m: &HermitianMat, v: &ComplexVec) -> Result<f64, NumericsError> {
    let mv = m.matvec(v)?;
    real_form(v.dot(&mv))
}

/// Solves `M x = b` for Hermitian positive-definite `M` by Cholesky
/// factorization `M = L L^H`.
pub fn solve_hermitian(m: &HermitianMat, b: &ComplexVec) -> Result<ComplexVec, NumericsError> {
    let n = m.dim();
    check_dim(n, b.len())?;
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut diag = m.get(j, j).re;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { index: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    // L y = b
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    // L^H x = y
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i].conj() * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(ComplexVec(x))
}

/// Gaussian elimination with partial pivoting for small general systems.
fn solve_small(mut a: Vec<Complex64>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>, NumericsError> {
    let n = b.len();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm())).unwrap_or(col);
        let magnitude = a[pivot_row * n + col].norm();
        if magnitude <= 1e-14 * scale {
            return Err(NumericsError::Singular { index: col, magnitude });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / p;
            if factor == ZERO {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[r * n + k] -= factor * t;
            }
            let t = b[col];
            b[r] -= factor * t;
        }
    }
    let mut x = vec![ZERO; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Hermitian matrix of the form `shift * I + sum_k w_k u_k u_k^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankHermitian {
    dim: usize,
    shift: f64,
    terms: Vec<(f64, ComplexVec)>,
}

impl LowRankHermitian {
    pub fn scaled_identity(dim: usize, shift: f64) -> Self {
        Self { dim, shift, terms: Vec::new() }
    }

    /// Adds the term `weight * u u^H`.
    pub fn with_term(mut self, weight: f64, u: &ComplexVec) -> Self {
        assert_eq!(u.len(), self.dim, "rank-1 term has wrong dimension");
        self.terms.push((weight, u.clone()));
        self
    }

    /// `sum_i c_i * M_i` over matrices of equal dimension.
    pub fn linear_combination(parts: &[(f64, &LowRankHermitian)]) -> Self {
        let dim = parts.first().map_or(0, |(_, m)| m.dim);
        let mut out = Self::scaled_identity(dim, 0.0);
        for (c, m) in parts {
            assert_eq!(m.dim, dim);
            out.shift += c * m.shift;
            out.terms.extend(m.terms.iter().map(|(w, u)| (c * w, u.clone())));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn terms(&self) -> &[(f64, ComplexVec)] {
        &self.terms
    }

    pub fn apply(&self, v: &ComplexVec) -> ComplexVec {
        let mut out = v.scale_real(self.shift);
        for (w, u) in &self.terms {
            out = out.axpy(u.dot(v) * *w, u);
        }
        out
    }

    pub fn quadratic_form(&self, v: &ComplexVec) -> f64 {
        self.shift * v.norm_sqr() + self.terms.iter().map(|(w, u)| w * u.projection_power(v)).sum::<f64>()
    }

    /// Solves `M x = b` with the Woodbury identity
    /// `(sI + U W U^H)^-1 = (I - U (sI + W U^H U)^-1 W U^H) / s`.
    pub fn solve(&self, b: &ComplexVec) -> Result<ComplexVec, NumericsError> {
        check_dim(self.dim, b.len())?;
        if self.shift <= 0.0 || !self.shift.is_finite() {
            return Err(NumericsError::NotPositiveDefinite { index: 0, pivot: self.shift });
        }
        let k = self.terms.len();
        if k == 0 {
            return Ok(b.scale_real(1.0 / self.shift));
        }
        let mut small = vec![ZERO; k * k];
        for r in 0..k {
            let (wr, ur) = &self.terms[r];
            for c in 0..k {
                let g = ur.dot(&self.terms[c].1);
                small[r * k + c] = g * *wr;
            }
            small[r * k + r] += self.shift;
        }
        let rhs: Vec<Complex64> = self.terms.iter().map(|(w, u)| u.dot(b) * *w).collect();
        let coeffs = solve_small(small, rhs)?;
        let mut x = b.clone();
        for ((_, u), c) in self.terms.iter().zip(coeffs) {
            x = x.axpy(-c, u);
        }
        Ok(x.scale_real(1.0 / self.shift))
    }

    pub fn to_dense(&self) -> HermitianMat {
        let mut m = HermitianMat::scaled_identity(self.dim, self.shift);
        for (w, u) in &self.terms {
            m = m.add(&HermitianMat::outer(u, *w));
        }
        m
    }
}

/// Settings for [`dominant_eigenvector`].
#[derive(Debug, Clone)]
pub struct PowerIteration {
    pub tol: f64,
    pub max_iter: usize,
    /// Start vector; the normalized all-ones vector when `None`.
    pub start: Option<ComplexVec>,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 10_000, start: None }
    }
}

impl PowerIteration {
    pub fn with_start(mut self, start: ComplexVec) -> Self {
        self.start = Some(start);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// Unit norm, first entry real and non-negative.
    pub vector: ComplexVec,
    pub value: f64,
    /// `||apply(v) - value * v||`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Error, Clone)]
#[error("power iteration did not converge after {iterations} steps (residual {residual:e})")]
pub struct NotConverged {
    pub best: Eigenpair,
    pub residual: f64,
    pub iterations: usize,
}

/// Dominant eigenpair of a linear operator by power iteration.
///
/// Stops once `||apply(v) - lambda v|| <= tol * max(1, |lambda|)`. The
/// eigenvalue estimate is `Re(v^H apply(v))`, which is exact for operators
/// with a real dominant eigenvalue. If the start vector is already an
/// eigenvector its first entry is nudged by `1e-3` so a non-dominant
/// eigenvector cannot be returned by accident.
pub fn dominant_eigenvector<F>(apply: F, dim: usize, opts: &PowerIteration) -> Result<Eigenpair, NotConverged>
where
    F: Fn(&ComplexVec) -> ComplexVec,
{
    assert!(dim >= 1, "operator dimension must be positive");
    let ones = || ComplexVec::from_fn(dim, |_| Complex64::new(1.0, 0.0));
    let mut v = opts
        .start
        .as_ref()
        .and_then(|s| s.normalized().ok())
        .unwrap_or_else(|| ones().normalized().expect("non-zero"))
        .phase_normalized();

    let mut best: Option<Eigenpair> = None;
    let mut restart = 0usize;
    let mut perturbed = false;
    for iter in 0..=opts.max_iter {
        let w = apply(&v);
        let w_norm = w.norm();
        if w_norm == 0.0 {
            // v lies in the null space; restart from the next basis vector.
            if restart >= dim {
                return Ok(Eigenpair { vector: v, value: 0.0, residual: 0.0, iterations: iter });
            }
            v = ComplexVec::basis(dim, restart);
            restart += 1;
            continue;
        }
        let value = v.dot(&w).re;
        let residual = w.axpy(Complex64::new(-value, 0.0), &v).norm();
        let scale = value.abs().max(1.0);
        let converged = residual <= opts.tol * scale;

        if converged && iter == 0 && !perturbed && dim > 1 {
            perturbed = true;
            let mut raw = v.clone().into_inner();
            raw[0] += 1e-3;
            v = ComplexVec(raw).normalized().expect("non-zero").phase_normalized();
            continue;
        }

        let pair = Eigenpair { vector: v.clone(), value, residual, iterations: iter };
        if converged {
            return Ok(pair);
        }
        if best.as_ref().is_none_or(|b| residual / scale < b.residual / b.value.abs().max(1.0)) {
            best = Some(pair);
        }
        v = w.scale_real(1.0 / w_norm).phase_normalized();
    }
    let best = best.expect("at least one iterate");
    Err(NotConverged { residual: best.residual, iterations: opts.max_iter, best })
}
