//! Dense row-major matrices over a generic scalar field.
//!
//! The same container backs both computation paths: [`ComplexMatrix`] for
//! double-precision complex arithmetic and [`crate::exact::RationalMatrix`]
//! for exact Gaussian-rational arithmetic. Shapes are always explicit; there
//! is no broadcasting. Zero-sized dimensions are allowed so that empty blocks
//! of partitioned matrices behave like genuine `0 x n` matrices.

mod qr;
mod svd;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use qr::{qr_column_pivoted, PivotedQr};
pub use svd::{rank, svd, SvdResult};
pub(crate) use svd::{pinv_at_scale, rank_at_scale, singular_values};

/// Scalar field the matrix container is generic over.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn conj(&self) -> Self;

    fn is_finite(&self) -> bool {
        true
    }
}

impl Scalar for Complex64 {
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Dense `rows x cols` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Double-precision complex matrix, the value type of the floating-point path.
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    /// Builds a matrix from row-major entries.
    ///
    /// Fails when the entry count does not match the shape or when an entry
    /// is not finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "from_vec",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a list of rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
            return Err(Error::shape(
                "from_rows",
                format!("row {bad} has {} entries, expected {ncols}", rows[bad].len()),
            ));
        }
        Self::from_vec(nrows, ncols, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
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

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Matrix product with a shape check.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::shape(
                "multiply",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = &self.data[i * self.cols + l];
                if a.is_zero() {
                    continue;
                }
                let rrow = rhs.row(l);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o = o.clone() + a.clone() * b.clone();
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, op: &'static str, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::shape(
                op,
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, rhs.rows, rhs.cols
                ),
            ));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a.clone() + b.clone())
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "sub", |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// `B^q` for square `B`, with `B^0 = I`.
    pub fn pow(&self, q: usize) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::shape(
                "power",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..q {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Copies the `nrows x ncols` block whose top-left corner is `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        assert!(
            r0 + nrows <= self.rows && c0 + ncols <= self.cols,
            "block out of bounds"
        );
        Self::from_fn(nrows, ncols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows {
            return Err(Error::shape(
                "hstack",
                format!("{} rows vs {} rows", self.rows, rhs.rows),
            ));
        }
        let cols = self.cols + rhs.cols;
        Ok(Self::from_fn(self.rows, cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        }))
    }

    /// Vertical concatenation `[self; rhs]`.
    pub fn vstack(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.cols {
            return Err(Error::shape(
                "vstack",
                format!("{} cols vs {} cols", self.cols, rhs.cols),
            ));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Matrix {
            rows: self.rows + rhs.rows,
            cols: self.cols,
            data,
        })
    }

    /// Assembles `[[tl, tr], [bl, br]]`.
    pub fn from_blocks(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Result<Self> {
        tl.hstack(tr)?.vstack(&bl.hstack(br)?)
    }

    /// Block-diagonal `diag(self, rhs)`.
    pub fn block_diag(&self, rhs: &Self) -> Self {
        let (r, c) = (self.rows + rhs.rows, self.cols + rhs.cols);
        Self::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self[(i, j)].clone()
            } else if i >= self.rows && j >= self.cols {
                rhs[(i - self.rows, j - self.cols)].clone()
            } else {
                T::zero()
            }
        })
    }
}

impl ComplexMatrix {
    /// Real-valued matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(
            rows,
            cols,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// `‖self - other‖_F / max(1, ‖self‖_F, ‖other‖_F)`.
    ///
    /// Panics on shape mismatch.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let diff = (self - other).frobenius_norm();
        diff / 1f64.max(self.frobenius_norm()).max(other.frobenius_norm())
    }

    /// Sets entries with modulus at or below `threshold` to exact zero.
    pub fn chop(&self, threshold: f64) -> Self {
        self.map(|z| if z.norm() <= threshold { Complex64::zero() } else { *z })
    }

    /// Inverse of a square matrix by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::shape(
                "inverse",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        if self.rows == 0 {
            return Ok(self.clone());
        }
        let n = self.rows;
        let mut lhs = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| lhs[(i, col)].norm().total_cmp(&lhs[(j, col)].norm()))
                .expect("nonempty range");
            if lhs[(pivot, col)].norm() == 0.0 {
                return Err(Error::Domain(format!("{n}x{n} matrix is singular")));
            }
            if pivot != col {
                for j in 0..n {
                    lhs.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let d = Complex64::new(1.0, 0.0) / lhs[(col, col)];
            for j in 0..n {
                lhs[(col, j)] *= d;
                inv[(col, j)] *= d;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = lhs[(i, col)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (l, v) = (lhs[(col, j)], inv[(col, j)]);
                    lhs[(i, j)] -= f * l;
                    inv[(i, j)] -= f * v;
                }
            }
        }
        if !inv.data.iter().all(Scalar::is_finite) {
            return Err(Error::Numeric("inverse overflowed".into()));
        }
        Ok(inv)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator forms panic on shape mismatch; use the `try_*` methods where the
// shapes come from untrusted input.
impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl<T: Scalar> $tr<&Matrix<T>> for Matrix<T> {
            type Output = Matrix<T>;

            fn $method(self, rhs: &Matrix<T>) -> Matrix<T> {
                (&self).$method(rhs)
            }
        }

        impl<T: Scalar> $tr<Matrix<T>> for Matrix<T> {
            type Output = Matrix<T>;

            fn $method(self, rhs: Matrix<T>) -> Matrix<T> {
                (&self).$method(&rhs)
            }
        }

        impl<T: Scalar> $tr<Matrix<T>> for &Matrix<T> {
            type Output = Matrix<T>;

            fn $method(self, rhs: Matrix<T>) -> Matrix<T> {
                self.$method(&rhs)
            }
        }
    };
}

owned_binop!(Mul, mul);
owned_binop!(Add, add);
owned_binop!(Sub, sub);

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?}, ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Shorthand for building a real [`ComplexMatrix`] in tests and fixtures.
///
/// Panics if the rows are ragged.
pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    let data: Vec<f64> = rows.iter().flat_map(|row| row.iter().copied()).collect();
    ComplexMatrix::from_real(r, c, &data).expect("ragged rows")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_times_b_is_b() {
        let b = real(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 6.0]]);
        assert_eq!(&ComplexMatrix::identity(3) * &b, b);
    }

    #[test]
    fn nilpotent_square_is_zero() {
        let j = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((&j * &j).is_zero());
    }

    #[test]
    fn product_powers_stabilize_at_three() {
        let a = real(&[&[1., 1., 0.], &[0., 1., 0.], &[0., 0., 1.], &[0., 0., 0.]]);
        let w = real(&[&[1., 1., 0., 0.], &[0., 0., 1., 0.], &[0., 0., 0., 1.]]);
        let aw = &a * &w;
        assert_eq!(aw.shape(), (4, 4));
        // Hand-computed: AW = [[1,1,1,0],[0,0,1,0],[0,0,0,1],[0,0,0,0]].
        assert_eq!(
            aw,
            real(&[&[1., 1., 1., 0.], &[0., 0., 1., 0.], &[0., 0., 0., 1.], &[0., 0., 0., 0.]])
        );
        assert!(!aw.pow(3).unwrap().is_zero());
        assert_eq!(
            aw.pow(3).unwrap(),
            real(&[&[1., 1., 2., 2.], &[0.; 4], &[0.; 4], &[0.; 4]])
        );
        // AW has eigenvalue 1, so the powers stabilize instead of vanishing.
        assert_eq!(aw.pow(4).unwrap(), aw.pow(3).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.try_mul(&a), Err(Error::Shape { .. })));
        assert!(matches!(
            ComplexMatrix::from_vec(2, 2, vec![c(0., 0.); 3]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let r = ComplexMatrix::from_vec(1, 2, vec![c(1., 0.), c(f64::NAN, 0.)]);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn adjoint_conjugates_and_is_involution() {
        let a = ComplexMatrix::from_vec(1, 1, vec![c(0., 1.)]).unwrap();
        assert_eq!(a.adjoint()[(0, 0)], c(0., -1.));
        let s = real(&[&[1., 2.], &[2., 5.]]);
        assert_eq!(s.adjoint(), s);
        let b = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64 - 1.0));
        assert_eq!(b.adjoint().adjoint(), b);
        assert_eq!(b.adjoint()[(2, 1)], c(1., -1.));
    }

    #[test]
    fn zero_sized_blocks_compose() {
        let e = ComplexMatrix::zeros(0, 3);
        let b = ComplexMatrix::zeros(3, 2);
        assert_eq!((&e * &b).shape(), (0, 2));
        let id = ComplexMatrix::identity(2);
        let m = ComplexMatrix::from_blocks(
            &id,
            &ComplexMatrix::zeros(2, 0),
            &ComplexMatrix::zeros(0, 2),
            &ComplexMatrix::zeros(0, 0),
        )
        .unwrap();
        assert_eq!(m, id);
    }

    #[test]
    fn power_zero_is_identity() {
        let b = real(&[&[2., 1.], &[0., 3.]]);
        assert_eq!(b.pow(0).unwrap(), ComplexMatrix::identity(2));
        assert_eq!(b.pow(1).unwrap(), b);
        assert!(ComplexMatrix::zeros(2, 3).pow(2).is_err());
    }
}
