//! Dense complex matrices and the tolerance profile that governs every
//! numerical decision in the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense `rows x cols` matrix of double-precision complex scalars, stored
/// row-major.
///
/// The arithmetic operators on references panic on dimension mismatch, in
/// like the standard slice indexing operators. The `try_*` methods report the mismatch as
/// an [`Error::DimensionMismatch`] instead and are what user-facing entry
/// points use.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Parse(format!(
                "matrix data has {} entries, expected {rows}x{cols} = {}",
                data.len(),
                rows * cols
            )));
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
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row slices. Panics on ragged input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        Self::from_fn(r, c, |i, j| {
            let row = rows[i].as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            Complex64::new(row[j], 0.0)
        })
    }

    /// Builds a matrix from complex row slices. Panics on ragged input.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        Self::from_fn(r, c, |i, j| {
            let row = rows[i].as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            row[j]
        })
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn real_diagonal(values: &[f64]) -> Self {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&v)
    }

    pub fn scalar(value: Complex64) -> Self {
        Self::diagonal(&[value])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn require_square(&self, op: &'static str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius inner product `<self, other> = sum conj(self_ij) * other_ij`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape("inner product", other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    fn check_same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                op,
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape("addition", other)?;
        Ok(self.zip_with(other, |x, y| x + y))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape("subtraction", other)?;
        Ok(self.zip_with(other, |x, y| x - y))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "matrix product",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &lik) in lhs_row.iter().enumerate() {
                if lik == ZERO {
                    continue;
                }
                for (o, &rkj) in out_row.iter_mut().zip(other.row(k)) {
                    *o += lik * rkj;
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&x, &y)| f(x, y)).collect(),
        }
    }

    /// `self^k` for a square matrix; `self^0 = I`.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let n = self.require_square("matrix power")?;
        let mut acc = Self::identity(n);
        for _ in 0..k {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Copies the `rows x cols` window whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols, "window out of range");
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        let (m, n) = (a.rows, d.rows);
        let conform = a.cols == m
            && d.cols == n
            && b.shape() == (m, n)
            && c.shape() == (n, m);
        if !conform {
            return Err(Error::DimensionMismatch {
                op: "block assembly",
                lhs: a.shape(),
                rhs: d.shape(),
            });
        }
        Ok(Self::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - m)],
            (false, true) => c[(i - m, j)],
            (false, false) => d[(i - m, j - m)],
        }))
    }

    /// Splits a square `(m+n) x (m+n)` matrix into its four blocks.
    pub fn split_blocks(&self, m: usize, n: usize) -> Result<[Self; 4]> {
        if self.shape() != (m + n, m + n) {
            return Err(Error::DimensionMismatch {
                op: "block split",
                lhs: self.shape(),
                rhs: (m + n, m + n),
            });
        }
        Ok([
            self.submatrix(0, 0, m, m),
            self.submatrix(0, m, m, n),
            self.submatrix(m, 0, n, m),
            self.submatrix(m, m, n, n),
        ])
    }

    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub(crate) fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Thresholds for numerical rank, identity checks and core invertibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub rank_rtol: f64,
    pub residual_rtol: f64,
    pub cond_max: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-9,
            residual_rtol: 1e-9,
            cond_max: 1e8,
        }
    }
}

impl ToleranceProfile {
    pub fn new(rank_rtol: f64, residual_rtol: f64, cond_max: f64) -> Result<Self> {
        let tol = Self {
            rank_rtol,
            residual_rtol,
            cond_max,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.rank_rtol) || self.rank_rtol >= 1.0 {
            return Err(Error::InvalidTolerance(format!(
                "rank_rtol must lie in (0, 1), got {}",
                self.rank_rtol
            )));
        }
        if !positive(self.residual_rtol) {
            return Err(Error::InvalidTolerance(format!(
                "residual_rtol must be positive, got {}",
                self.residual_rtol
            )));
        }
        if !positive(self.cond_max) {
            return Err(Error::InvalidTolerance(format!(
                "cond_max must be positive, got {}",
                self.cond_max
            )));
        }
        Ok(())
    }

    /// `x ≈ y` in the sense of [`relative_residual`].
    pub fn approx_eq(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> bool {
        relative_residual(x, y) <= self.residual_rtol
    }
}

/// `‖x − y‖_F / max(1, ‖y‖_F)`.
///
/// Returns infinity when the shapes differ so a mismatch can never pass a
/// threshold check.
pub fn relative_residual(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    match x.try_sub(y) {
        Ok(diff) => diff.frobenius_norm() / y.frobenius_norm().max(1.0),
        Err(_) => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_matches_hand_arithmetic() {
        let a = ComplexMatrix::from_rows(&[[c(1.0, 1.0), c(0.0, 2.0)], [c(3.0, 0.0), c(0.0, 0.0)]]);
        let b = ComplexMatrix::from_rows(&[[c(0.0, 1.0)], [c(1.0, 0.0)]]);
        let p = &a * &b;
        assert_eq!(p.shape(), (2, 1));
        assert_eq!(p[(0, 0)], c(-1.0, 1.0) + c(0.0, 2.0));
        assert_eq!(p[(1, 0)], c(0.0, 3.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            a.try_add(&ComplexMatrix::zeros(3, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn transposes_differ_by_conjugation() {
        let a = ComplexMatrix::from_rows(&[[c(1.0, 2.0), c(3.0, -1.0)]]);
        assert_eq!(a.transpose()[(1, 0)], c(3.0, -1.0));
        assert_eq!(a.conj_transpose()[(1, 0)], c(3.0, 1.0));
    }

    #[test]
    fn blocks_round_trip() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::from_real_rows(&[[3.0], [4.0]]);
        let cm = ComplexMatrix::from_real_rows(&[[5.0, 6.0]]);
        let d = ComplexMatrix::real_diagonal(&[7.0]);
        let m = ComplexMatrix::from_blocks(&a, &b, &cm, &d).unwrap();
        assert_eq!(m[(0, 2)], c(3.0, 0.0));
        assert_eq!(m[(2, 1)], c(6.0, 0.0));
        let [a2, b2, c2, d2] = m.split_blocks(2, 1).unwrap();
        assert_eq!((a2, b2, c2, d2), (a, b, cm, d));
    }

    #[test]
    fn relative_residual_uses_unit_floor() {
        let x = ComplexMatrix::real_diagonal(&[1e-3]);
        let zero = ComplexMatrix::zeros(1, 1);
        assert!((relative_residual(&x, &zero) - 1e-3).abs() < 1e-18);
        let big = ComplexMatrix::real_diagonal(&[100.0]);
        let bigger = ComplexMatrix::real_diagonal(&[101.0]);
        assert!((relative_residual(&bigger, &big) - 0.01).abs() < 1e-15);
        assert_eq!(relative_residual(&x, &ComplexMatrix::zeros(2, 2)), f64::INFINITY);
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceProfile::default().validate().is_ok());
        assert!(ToleranceProfile::new(1.0, 1e-9, 1e8).is_err());
        assert!(ToleranceProfile::new(1e-9, 0.0, 1e8).is_err());
        assert!(ToleranceProfile::new(1e-9, 1e-9, f64::NAN).is_err());
    }
}
