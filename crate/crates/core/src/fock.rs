//! Dense complex matrices and ladder operators on a truncated Fock space.
//!
//! Matrices are stored row-major in double precision. Fock index `n`
//! coincides with the matrix index, so `annihilation` has `√n` at `(n-1, n)`.

use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Builds a matrix from a closure over `(row, col)`.
    ///
    /// Panics if the closure produces a non-finite entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = f(r, c);
                assert!(z.is_finite(), "non-finite entry at ({r}, {c})");
                data.push(z);
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// `|i⟩⟨j|` on an `n`-level space.
    pub fn basis_projector(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.data[i * n + j] = ONE;
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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

    /// Entries in row-major order.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.conj()).collect(),
        )
    }

    pub fn adjoint(&self) -> Self {
        adjoint(self)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z * k).collect(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![ZERO; self.rows * rhs.cols];
        for i in 0..self.rows {
            let out_row = &mut out[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(self.rows, rhs.cols, out))
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Column-stacking vectorization: `vec(m)[i + rows * j] = m[i, j]`.
    pub fn vectorize(&self) -> Vec<Complex64> {
        let mut v = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self.get(r, c));
            }
        }
        v
    }

    /// Inverse of [`ComplexMatrix::vectorize`] for an `n`×`n` matrix.
    pub fn unvectorize(n: usize, v: &[Complex64]) -> Result<Self> {
        if v.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} is not a {n}x{n} matrix",
                v.len()
            )));
        }
        Self::new(n, n, (0..n * n).map(|k| v[(k % n) * n + k / n]).collect())
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch in elementwise operation"
        );
        Self::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

/// Panics on inner-dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

/// Number of retained Fock levels `|0⟩ … |D-1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub const MIN_DIM: usize = 3;

    pub fn new(dim: usize) -> Result<Self> {
        if dim < Self::MIN_DIM {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn ladder(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for n in 1..dim {
        m.data[(n - 1) * dim + n] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    m
}

/// Lowering operator, `(n-1, n) = √n`.
pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    ladder(space.dim())
}

/// Raising operator, the adjoint of [`annihilation`].
pub fn creation(space: FockSpace) -> ComplexMatrix {
    adjoint(&ladder(space.dim()))
}

/// `a†a = diag(0, 1, …, D-1)`.
pub fn number_operator(space: FockSpace) -> ComplexMatrix {
    ComplexMatrix::diagonal(
        &(0..space.dim())
            .map(|n| Complex64::new(n as f64, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// `a†a†aa = diag(n(n-1))`.
pub fn pair_number_operator(space: FockSpace) -> ComplexMatrix {
    ComplexMatrix::diagonal(
        &(0..space.dim())
            .map(|n| Complex64::new((n * n.saturating_sub(1)) as f64, 0.0))
            .collect::<Vec<_>>(),
    )
}

/// Ladder operators for matrix sizes below [`FockSpace::MIN_DIM`], used by tests
/// and small-block algebra.
pub fn annihilation_raw(dim: usize) -> ComplexMatrix {
    ladder(dim)
}

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.cols, m.rows, |r, c| m.get(c, r).conj())
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let base = (ar * b.rows + br) * cols + ac * b.cols;
                for (o, y) in data[base..base + b.cols].iter_mut().zip(b.row(br)) {
                    *o = x * y;
                }
            }
        }
    }
    ComplexMatrix::from_raw(rows, cols, data)
}

/// `Tr(rho · op)`.
pub fn expectation(op: &ComplexMatrix, rho: &ComplexMatrix) -> Result<Complex64> {
    if !op.is_square() || !rho.is_square() || op.rows != rho.rows {
        return Err(Error::DimensionMismatch(format!(
            "expectation needs equal square matrices, got {}x{} and {}x{}",
            op.rows, op.cols, rho.rows, rho.cols
        )));
    }
    let n = op.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += rho.get(i, k) * op.get(k, i);
        }
    }
    Ok(acc)
}
