//! Exact arithmetic over the Gaussian rationals `Q(i)`.
//!
//! Every inverse in this crate is a composition of products and
//! Moore-Penrose inverses, and the Moore-Penrose inverse of a matrix with
//! Gaussian-rational entries is again Gaussian-rational. Computing it through
//! a full-rank factorization `A = F G` keeps everything in the field, so the
//! routines here give ground truth for small fraction-valued examples.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Matrix, Scalar};

pub type RationalScalar = Complex<BigRational>;
pub type RationalMatrix = Matrix<RationalScalar>;

/// Largest dimension the exact routines accept.
pub const EXACT_SIZE_LIMIT: usize = 32;

impl Scalar for RationalScalar {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

/// The real rational `num / den`.
///
/// Panics if `den` is zero.
pub fn rational(num: i64, den: i64) -> RationalScalar {
    Complex::new(
        BigRational::new(BigInt::from(num), BigInt::from(den)),
        BigRational::zero(),
    )
}

/// Integer matrix from row-major entries. Panics on a length mismatch.
pub fn from_integers(rows: usize, cols: usize, data: &[i64]) -> RationalMatrix {
    assert_eq!(data.len(), rows * cols, "entry count");
    RationalMatrix::from_fn(rows, cols, |i, j| rational(data[i * cols + j], 1))
}

/// Exact rational image of a float matrix (every finite double is a dyadic rational).
pub fn from_float(a: &ComplexMatrix) -> Result<RationalMatrix> {
    let conv = |x: f64| {
        BigRational::from_float(x).ok_or_else(|| Error::Numeric(format!("cannot convert {x}")))
    };
    let mut data = Vec::with_capacity(a.rows() * a.cols());
    for z in a.as_slice() {
        data.push(Complex::new(conv(z.re)?, conv(z.im)?));
    }
    RationalMatrix::from_vec(a.rows(), a.cols(), data)
}

/// Nearest-double conversion of every entry.
pub fn float_of(a: &RationalMatrix) -> Result<ComplexMatrix> {
    let conv = |x: &BigRational| -> Result<f64> {
        match x.to_f64() {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Numeric(format!("{x} overflows f64"))),
        }
    };
    let mut data = Vec::with_capacity(a.rows() * a.cols());
    for z in a.as_slice() {
        data.push(Complex64::new(conv(&z.re)?, conv(&z.im)?));
    }
    ComplexMatrix::from_vec(a.rows(), a.cols(), data)
}

fn guard(a: &RationalMatrix) -> Result<()> {
    if a.rows() > EXACT_SIZE_LIMIT || a.cols() > EXACT_SIZE_LIMIT {
        return Err(Error::ExactSizeGuard {
            rows: a.rows(),
            cols: a.cols(),
            limit: EXACT_SIZE_LIMIT,
        });
    }
    Ok(())
}

fn require_square(a: &RationalMatrix, op: &'static str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::shape(
            op,
            format!("{}x{} is not square", a.rows(), a.cols()),
        ));
    }
    Ok(())
}

/// Reduced row echelon form and pivot columns.
fn rref(a: &RationalMatrix) -> (RationalMatrix, Vec<usize>) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&i| !r[(i, col)].is_zero()) else {
            continue;
        };
        if p != row {
            for j in 0..n {
                let tmp = r[(row, j)].clone();
                r[(row, j)] = r[(p, j)].clone();
                r[(p, j)] = tmp;
            }
        }
        let inv = RationalScalar::from(BigRational::from_integer(1.into())) / r[(row, col)].clone();
        for j in col..n {
            r[(row, j)] = r[(row, j)].clone() * inv.clone();
        }
        for i in 0..m {
            if i == row || r[(i, col)].is_zero() {
                continue;
            }
            let f = r[(i, col)].clone();
            for j in col..n {
                let delta = f.clone() * r[(row, j)].clone();
                r[(i, j)] = r[(i, j)].clone() - delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    (r, pivots)
}

pub fn exact_rank(a: &RationalMatrix) -> Result<usize> {
    guard(a)?;
    Ok(rref(a).1.len())
}

/// Inverse of a nonsingular square matrix by Gauss-Jordan elimination.
pub fn exact_inverse(a: &RationalMatrix) -> Result<RationalMatrix> {
    guard(a)?;
    require_square(a, "exact_inverse")?;
    let n = a.rows();
    let aug = a.hstack(&RationalMatrix::identity(n))?;
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::Domain(format!("{n}x{n} matrix is singular")));
    }
    Ok(r.block(0, n, n, n))
}

/// Moore-Penrose inverse through a full-rank factorization.
///
/// With `A = F G`, `F` the pivot columns of `A` and `G` the nonzero rows of
/// its reduced echelon form, `A^† = G* (G G*)^{-1} (F* F)^{-1} F*`.
pub fn exact_pinv(a: &RationalMatrix) -> Result<RationalMatrix> {
    guard(a)?;
    let (m, n) = a.shape();
    let (r, pivots) = rref(a);
    let rank = pivots.len();
    if rank == 0 {
        return Ok(RationalMatrix::zeros(n, m));
    }
    let f = RationalMatrix::from_fn(m, rank, |i, j| a[(i, pivots[j])].clone());
    let g = r.block(0, 0, rank, n);
    let g_star = g.adjoint();
    let f_star = f.adjoint();
    let ggs_inv = exact_inverse(&(&g * &g_star))?;
    let ffs_inv = exact_inverse(&(&f_star * &f))?;
    Ok(&(&(&g_star * &ggs_inv) * &ffs_inv) * &f_star)
}

/// `B B^†`.
pub fn exact_proj_range(b: &RationalMatrix) -> Result<RationalMatrix> {
    Ok(b * &exact_pinv(b)?)
}

/// `B^† B`.
pub fn exact_proj_corange(b: &RationalMatrix) -> Result<RationalMatrix> {
    Ok(&exact_pinv(b)? * b)
}

/// Smallest `k` with `rank(B^k) = rank(B^{k+1})`.
pub fn exact_index(b: &RationalMatrix) -> Result<usize> {
    guard(b)?;
    require_square(b, "exact_index")?;
    let mut power = RationalMatrix::identity(b.rows());
    let mut prev = exact_rank(&power)?;
    for k in 0..=b.rows() {
        power = &power * b;
        let next = exact_rank(&power)?;
        if next == prev {
            return Ok(k);
        }
        prev = next;
    }
    unreachable!("rank sequence of an n x n matrix stabilizes by step n")
}

/// `A^k (A^{2k+1})^† A^k` with `k = Ind(A)`.
pub fn exact_drazin(a: &RationalMatrix) -> Result<RationalMatrix> {
    let k = exact_index(a)?;
    let ak = a.pow(k)?;
    Ok(&(&ak * &exact_pinv(&a.pow(2 * k + 1)?)?) * &ak)
}

/// `(A P_{A^q})^†`.
pub fn exact_qbt(a: &RationalMatrix, q: usize) -> Result<RationalMatrix> {
    guard(a)?;
    require_square(a, "exact_qbt")?;
    let p = exact_proj_range(&a.pow(q)?)?;
    exact_pinv(&(a * &p))
}

fn check_pair(a: &RationalMatrix, w: &RationalMatrix) -> Result<()> {
    guard(a)?;
    guard(w)?;
    if a.rows() != w.cols() || a.cols() != w.rows() {
        return Err(Error::shape(
            "weighted pair",
            format!(
                "A is {}x{} but W is {}x{}",
                a.rows(),
                a.cols(),
                w.rows(),
                w.cols()
            ),
        ));
    }
    if w.is_zero() {
        return Err(Error::Domain("weight W must be nonzero".into()));
    }
    Ok(())
}

/// `(W A W P_{(AW)^q})^†`.
pub fn exact_weighted_qbt(a: &RationalMatrix, w: &RationalMatrix, q: usize) -> Result<RationalMatrix> {
    check_pair(a, w)?;
    let aw = a * w;
    let p = exact_proj_range(&aw.pow(q)?)?;
    exact_pinv(&(&(&(w * a) * w) * &p))
}

/// `max(Ind(AW), Ind(WA))`.
pub fn exact_weighted_index(a: &RationalMatrix, w: &RationalMatrix) -> Result<(usize, usize, usize)> {
    check_pair(a, w)?;
    let iaw = exact_index(&(a * w))?;
    let iwa = exact_index(&(w * a))?;
    Ok((iaw, iwa, iaw.max(iwa)))
}

pub fn exact_weighted_core_ep(a: &RationalMatrix, w: &RationalMatrix) -> Result<RationalMatrix> {
    let (_, _, k) = exact_weighted_index(a, w)?;
    exact_weighted_qbt(a, w, k)
}

/// `A [(WA)^d]^2`.
pub fn exact_weighted_drazin(a: &RationalMatrix, w: &RationalMatrix) -> Result<RationalMatrix> {
    check_pair(a, w)?;
    let d = exact_drazin(&(w * a))?;
    Ok(&(a * &d) * &d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_pair() -> (RationalMatrix, RationalMatrix) {
        (
            from_integers(4, 3, &[1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]),
            from_integers(3, 4, &[1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
        )
    }

    fn first_column(entries: &[(i64, i64)]) -> RationalMatrix {
        RationalMatrix::from_fn(4, 3, |i, j| {
            if j == 0 {
                rational(entries[i].0, entries[i].1)
            } else {
                rational(0, 1)
            }
        })
    }

    fn assert_penrose(a: &RationalMatrix, x: &RationalMatrix) {
        assert_eq!(&(a * x) * a, *a);
        assert_eq!(&(x * a) * x, *x);
        assert_eq!((a * x).adjoint(), a * x);
        assert_eq!((x * a).adjoint(), x * a);
    }

    #[test]
    fn rank_of_zero_and_reference_matrices() {
        let (a, w) = reference_pair();
        assert_eq!(exact_rank(&RationalMatrix::zeros(3, 3)).unwrap(), 0);
        assert_eq!(exact_rank(&a).unwrap(), 3);
        assert_eq!(exact_rank(&(&a * &w).pow(3).unwrap()).unwrap(), 1);
    }

    #[test]
    fn pinv_of_diagonal() {
        let d = from_integers(2, 2, &[2, 0, 0, 0]);
        let x = exact_pinv(&d).unwrap();
        assert_eq!(x[(0, 0)], rational(1, 2));
        assert!(x[(1, 1)].is_zero());
        assert_penrose(&d, &x);
    }

    #[test]
    fn pinv_satisfies_penrose_exactly_with_complex_entries() {
        let i = Complex::new(BigRational::zero(), BigRational::from_integer(1.into()));
        let a = RationalMatrix::from_fn(3, 4, |r, c| {
            let base = rational(((r * 5 + c * 3) % 4) as i64 - 1, 1);
            if (r + c) % 2 == 0 {
                base + i.clone()
            } else {
                base
            }
        });
        let x = exact_pinv(&a).unwrap();
        assert_penrose(&a, &x);
        // rank-deficient: duplicate a row
        let b = a.vstack(&a.block(0, 0, 1, 4)).unwrap();
        assert_penrose(&b, &exact_pinv(&b).unwrap());
    }

    #[test]
    fn reference_weighted_bt_and_qbt() {
        let (a, w) = reference_pair();
        assert_eq!(
            exact_weighted_qbt(&a, &w, 1).unwrap(),
            first_column(&[(1, 6), (1, 6), (1, 3), (0, 1)])
        );
        assert_eq!(
            exact_weighted_qbt(&a, &w, 2).unwrap(),
            first_column(&[(1, 2), (1, 2), (0, 1), (0, 1)])
        );
        assert_eq!(
            exact_weighted_qbt(&a, &w, 3).unwrap(),
            first_column(&[(1, 1), (0, 1), (0, 1), (0, 1)])
        );
        let www = &(&w * &a) * &w;
        assert_eq!(exact_weighted_qbt(&a, &w, 0).unwrap(), exact_pinv(&www).unwrap());
    }

    #[test]
    fn reference_dual_representation_q1() {
        let (a, w) = reference_pair();
        let wa_q1 = exact_qbt(&(&w * &a), 1).unwrap();
        let right = &(&a * &wa_q1) * &wa_q1;
        assert_eq!(right, first_column(&[(3, 25), (2, 25), (0, 1), (0, 1)]));
    }

    #[test]
    fn indices_of_reference_pair() {
        let (a, w) = reference_pair();
        assert_eq!(exact_weighted_index(&a, &w).unwrap(), (3, 2, 3));
    }

    #[test]
    fn drazin_equations_hold_exactly() {
        let (a, w) = reference_pair();
        let wa = &w * &a;
        let x = exact_drazin(&wa).unwrap();
        let k = exact_index(&wa).unwrap();
        assert_eq!(&x * &wa.pow(k + 1).unwrap(), wa.pow(k).unwrap());
        assert_eq!(&(&x * &wa) * &x, x);
        assert_eq!(&wa * &x, &x * &wa);

        let nonsingular = from_integers(2, 2, &[2, 1, 1, 1]);
        assert_eq!(
            exact_drazin(&nonsingular).unwrap(),
            exact_inverse(&nonsingular).unwrap()
        );
        assert!(exact_drazin(&from_integers(2, 2, &[0, 1, 0, 0])).unwrap().is_zero());
    }

    #[test]
    fn float_conversion() {
        let m = RationalMatrix::from_vec(1, 3, vec![rational(1, 2), rational(1, 3), rational(-7, 1)])
            .unwrap();
        let f = float_of(&m).unwrap();
        assert_eq!(f[(0, 0)].re, 0.5);
        assert_eq!(f[(0, 1)].re, 1.0 / 3.0);
        assert_eq!(from_float(&f).unwrap()[(0, 2)], rational(-7, 1));
        let huge = RationalMatrix::from_vec(
            1,
            1,
            vec![Complex::new(
                BigRational::from_integer(BigInt::from(10).pow(400)),
                BigRational::zero(),
            )],
        )
        .unwrap();
        assert!(matches!(float_of(&huge), Err(Error::Numeric(_))));
    }

    #[test]
    fn size_guard_and_weight_checks() {
        let big = RationalMatrix::zeros(33, 2);
        assert!(matches!(exact_pinv(&big), Err(Error::ExactSizeGuard { .. })));
        let (a, _) = reference_pair();
        assert!(matches!(
            exact_weighted_qbt(&a, &RationalMatrix::zeros(3, 4), 1),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            exact_weighted_qbt(&a, &RationalMatrix::zeros(4, 3), 1),
            Err(Error::Shape { .. })
        ));
    }
}
