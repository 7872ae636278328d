//! Dense real matrix kernel.
//!
//! Storage is row-major. Arithmetic helpers panic on shape mismatch (a
//! programming error); the factorizations and the public operations that take
//! user data return [`Error`].

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot floor shared by QR and the rank checks.
pub const PIVOT_FLOOR: f64 = 1e-13;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// A real `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "empty matrix");
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// The first `cols` columns of the `rows x rows` identity.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols || !data.iter().all(|v| v.is_finite())
        {
            return Err(Error::InvalidMatrix);
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows; convenient for small literals.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|row| row.as_ref().len() != c) {
            return Err(Error::InvalidMatrix);
        }
        let data = rows.iter().flat_map(|row| row.as_ref().iter().copied()).collect();
        Self::from_row_major(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᵀ * other` without forming the transpose.
    pub fn t_matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows, "t_matmul shape mismatch");
        let (p, n) = (self.cols, other.cols);
        let mut out = Self::zeros(p, n);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * otherᵀ`.
    pub fn matmul_t(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.cols, "matmul_t shape mismatch");
        Self::from_fn(self.rows, other.rows, |i, j| {
            self.row(i).iter().zip(other.row(j)).map(|(a, b)| a * b).sum()
        })
    }

    fn assert_same_shape(&self, other: &DenseMatrix) {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        self.assert_same_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseMatrix { data, ..*self }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        self.assert_same_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseMatrix { data, ..*self }
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        DenseMatrix { data, ..*self }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &DenseMatrix) {
        self.assert_same_shape(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Frobenius inner product `tr(selfᵀ other)`.
    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        self.assert_same_shape(other);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        sqrt(self.data.iter().map(|a| a * a).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &a| m.max(abs(a)))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `(A + Aᵀ)/2`; panics on non-square input.
    pub fn sym(&self) -> DenseMatrix {
        assert!(self.is_square(), "sym of non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    /// `(A - Aᵀ)/2`; panics on non-square input.
    pub fn skew(&self) -> DenseMatrix {
        assert!(self.is_square(), "skew of non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] - self[(j, i)]))
    }

    /// `‖A − Aᵀ‖_F`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square(), "asymmetry of non-square matrix");
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = self[(i, j)] - self[(j, i)];
                s += 2.0 * d * d;
            }
        }
        sqrt(s)
    }

    /// Makes the matrix exactly symmetric by averaging mirrored entries.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square(), "symmetrize of non-square matrix");
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    /// Multiplies column `j` by `d[j]` (i.e. `self * diag(d)`).
    pub fn scale_columns(&self, d: &[f64]) -> DenseMatrix {
        assert_eq!(d.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * d[j])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Thin QR factors with `diag(r) > 0`.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Sign-fixed thin QR of a full-column-rank matrix via Householder reflections.
///
/// The returned `r` has a strictly positive diagonal, which makes the factors
/// unique.
pub fn qf(m: &DenseMatrix) -> Result<QrFactors> {
    let (rows, cols) = m.shape();
    if cols > rows {
        return Err(Error::ShapeMismatch {
            expected: (rows, rows),
            found: (rows, cols),
        });
    }
    let scale = m.norm_fro();
    let floor = PIVOT_FLOOR * scale;
    let mut a = m.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);

    for k in 0..cols {
        let mut v: Vec<f64> = (k..rows).map(|i| a[(i, k)]).collect();
        let norm_x = sqrt(v.iter().map(|x| x * x).sum());
        let alpha = if v[0] >= 0.0 { -norm_x } else { norm_x };
        v[0] -= alpha;
        let norm_v = sqrt(v.iter().map(|x| x * x).sum());
        if norm_v > 0.0 {
            for x in v.iter_mut() {
                *x /= norm_v;
            }
            // A[k.., k..] -= 2 v (vᵀ A[k.., k..])
            for j in k..cols {
                let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[(k + t, j)]).sum();
                for (t, vt) in v.iter().enumerate() {
                    a[(k + t, j)] -= 2.0 * vt * s;
                }
            }
        } else {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
        reflectors.push(v);
    }

    let mut r = DenseMatrix::zeros(cols, cols);
    for i in 0..cols {
        for j in i..cols {
            r[(i, j)] = a[(i, j)];
        }
    }

    // Q = H_0 ⋯ H_{n-1} [I; 0]
    let mut q = DenseMatrix::eye(rows, cols);
    for k in (0..cols).rev() {
        let v = &reflectors[k];
        for j in 0..cols {
            let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * q[(k + t, j)]).sum();
            if s == 0.0 {
                continue;
            }
            for (t, vt) in v.iter().enumerate() {
                q[(k + t, j)] -= 2.0 * vt * s;
            }
        }
    }

    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            for c in j..cols {
                r[(j, c)] = -r[(j, c)];
            }
            for i in 0..rows {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }

    let min_pivot = (0..cols).map(|j| r[(j, j)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > floor) || !q.is_finite() {
        return Err(Error::RankDeficient {
            pivot: min_pivot,
            floor,
        });
    }
    Ok(QrFactors { q, r })
}

/// Splits a square matrix into its symmetric and antisymmetric parts.
pub fn sym_skew_split(a: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok((a.sym(), a.skew()))
}

/// Lower Cholesky factor `L` with `L Lᵀ = X`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    /// Factors `x` using its lower triangle.
    pub fn new(x: &DenseMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::NonSquare {
                rows: x.rows(),
                cols: x.cols(),
            });
        }
        let n = x.rows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = x[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d });
            }
            let ljj = sqrt(d);
            l[(j, j)] = ljj;
            for i in (j + 1)..n {
                let mut s = x[(i, j)];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// `ln det X = 2 Σ ln L_ii`.
    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| ln(self.l[(i, i)])).sum::<f64>()
    }

    /// Solves `X Y = B`.
    pub fn solve(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::ShapeMismatch {
                expected: (n, b.cols()),
                found: b.shape(),
            });
        }
        let mut y = b.clone();
        let c = b.cols();
        // forward: L z = b
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[(i, k)];
                if lik == 0.0 {
                    continue;
                }
                for j in 0..c {
                    let v = y[(k, j)];
                    y[(i, j)] -= lik * v;
                }
            }
            let lii = self.l[(i, i)];
            for j in 0..c {
                y[(i, j)] /= lii;
            }
        }
        // backward: Lᵀ y = z
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l[(k, i)];
                if lki == 0.0 {
                    continue;
                }
                for j in 0..c {
                    let v = y[(k, j)];
                    y[(i, j)] -= lki * v;
                }
            }
            let lii = self.l[(i, i)];
            for j in 0..c {
                y[(i, j)] /= lii;
            }
        }
        Ok(y)
    }
}

/// Cholesky factor and log-determinant of a symmetric positive definite matrix.
pub fn chol_logdet(x: &DenseMatrix) -> Result<(f64, Cholesky)> {
    let chol = Cholesky::new(x)?;
    Ok((chol.ln_det(), chol))
}

/// `X⁻¹ B` for SPD `X`.
pub fn spd_solve(x: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    Cholesky::new(x)?.solve(b)
}
