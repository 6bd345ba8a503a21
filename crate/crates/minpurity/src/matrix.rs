//! Dense complex matrices plus the numerical kernels the rest of the crate
//! is built on: Kronecker products, Hermitian eigendecomposition (cyclic
//! Jacobi) and the Hermitian matrix exponential.
//!
//! Storage is row-major `Vec<Complex64>`. Everything here stays dense; the
//! operators handled by this crate live on spaces of dimension at most a few
//! hundred, where dense Jacobi is both simple and accurate.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance for structural checks (hermiticity, unitarity, ...),
/// scaled by the Frobenius norm of the operand where that is ambiguous.
pub const STRUCT_TOL: f64 = 1e-9;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a row-major entry list.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument(format!(
                "entry count {} does not match {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self { rows, cols, entries }
    }

    /// Real diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, Complex64::new(*v, 0.0));
        }
        m
    }

    /// Matrix unit |a><b| in dimension `dim`.
    pub fn matrix_unit(dim: usize, a: usize, b: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.set(a, b, Complex64::new(1.0, 0.0));
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let entries = self.entries.iter().map(|a| a * factor).collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.entries[i * self.cols + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let row_b = &other.entries[k * other.cols..(k + 1) * other.cols];
                let row_o = &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (o, b) in row_o.iter_mut().zip(row_b) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt inner product tr(self^dag * other).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// tr(self * other) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self.get(r, c) * other.get(c, r);
            }
        }
        acc
    }

    /// || self - self^dag ||_F, zero for Hermitian input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.get(r, c) - self.get(c, r).conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * self.frobenius_norm().max(1.0)
    }

    /// || self * self^dag - I ||_F.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.mul(&self.dagger());
        prod.sub(&Self::identity(self.rows)).frobenius_norm()
    }

    /// Exactly Hermitian average (self + self^dag)/2.
    pub fn hermitized(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()).scale(0.5)
        })
    }
}

/// Kronecker product of two matrices; dimensions multiply.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// Returns eigenvalues sorted ascending and the unitary of eigenvectors
/// (as columns), so that `m = V diag(lambda) V^dag`.
pub fn herm_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::InvalidArgument(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.frobenius_norm();
    let herm_res = m.hermiticity_residual();
    if herm_res > STRUCT_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { residual: herm_res });
    }

    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    // Work on the exactly Hermitian part so the diagonal stays real.
    let mut a = m.hermitized();
    let mut v = ComplexMatrix::identity(n);
    let stop = 1e-14 * scale.max(f64::MIN_POSITIVE);

    let mut converged = scale == 0.0;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut acc = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    acc += a.get(p, q).norm_sqr();
                }
            }
            (2.0 * acc).sqrt()
        };
        if off <= stop {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let phase = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Right-multiply columns p,q of A and V by the rotation,
                // then left-multiply rows p,q of A by its adjoint.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp.scale(c) - akq * phase.conj().scale(s));
                    a.set(k, q, akp * phase.scale(s) + akq.scale(c));
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp.scale(c) - vkq * phase.conj().scale(s));
                    v.set(k, q, vkp * phase.scale(s) + vkq.scale(c));
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, apk.scale(c) - aqk * phase.scale(s));
                    a.set(q, k, apk * phase.conj().scale(s) + aqk.scale(c));
                }
            }
        }
    }
    if !converged {
        // One more off-norm check; Jacobi is globally convergent so this
        // only fires on pathological (non-finite) input.
        let mut acc = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                acc += a.get(p, q).norm_sqr();
            }
        }
        if (2.0 * acc).sqrt() > stop {
            return Err(Error::Numerical(
                "Jacobi eigensolver did not converge".into(),
            ));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok((eigenvalues, vectors))
}

/// exp(-i t h) for Hermitian `h`, computed through the eigendecomposition.
///
/// The result is unitary up to rounding; callers that need the invariant
/// enforced wrap it in [`crate::state::UnitaryOperator`].
pub fn expm_ihermitian_matrix(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (eigenvalues, vectors) = herm_eig(h)?;
    let n = h.rows();
    let mut phased = ComplexMatrix::zeros(n, n);
    for c in 0..n {
        let phase = Complex64::from_polar(1.0, -t * eigenvalues[c]);
        for r in 0..n {
            phased.set(r, c, vectors.get(r, c) * phase);
        }
    }
    Ok(phased.mul(&vectors.dagger()))
}

#[derive(Serialize, Deserialize)]
struct MatrixSchema {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let schema = MatrixSchema {
            rows: self.rows,
            cols: self.cols,
            re: self.entries.iter().map(|z| z.re).collect(),
            im: self.entries.iter().map(|z| z.im).collect(),
        };
        schema.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let schema = MatrixSchema::deserialize(deserializer)?;
        if schema.re.len() != schema.rows * schema.cols
            || schema.im.len() != schema.rows * schema.cols
        {
            return Err(D::Error::custom(format!(
                "matrix schema length mismatch: {}x{} with {} re / {} im entries",
                schema.rows,
                schema.cols,
                schema.re.len(),
                schema.im.len()
            )));
        }
        let entries: Vec<Complex64> = schema
            .re
            .iter()
            .zip(&schema.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_entries(schema.rows, schema.cols, entries)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}
