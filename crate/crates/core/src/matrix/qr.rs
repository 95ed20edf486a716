//! Householder QR with Businger-Golub column pivoting.

use num_complex::Complex64;
use num_traits::Zero;

use super::ComplexMatrix;

/// `A P = Q R` with `Q` unitary `m x m`, `R` upper triangular `m x n` whose
/// diagonal magnitudes are nonincreasing.
///
/// Column `j` of `A P` is column `perm[j]` of `A`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    pub perm: Vec<usize>,
}

impl PivotedQr {
    /// Number of diagonal entries of `R` above `rtol * |r_11|`.
    pub fn numerical_rank(&self, rtol: f64) -> usize {
        let p = self.r.rows().min(self.r.cols());
        let lead = if p == 0 { 0.0 } else { self.r[(0, 0)].norm() };
        if lead == 0.0 {
            return 0;
        }
        (0..p).take_while(|&i| self.r[(i, i)].norm() > rtol * lead).count()
    }

    /// The permutation as a matrix `P` with `A P = Q R`.
    pub fn permutation_matrix(&self) -> ComplexMatrix {
        let n = self.perm.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            if self.perm[j] == i {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::zero()
            }
        })
    }
}

pub fn qr_column_pivoted(a: &ComplexMatrix) -> PivotedQr {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..m.min(n) {
        let col_norm2 = |r: &ComplexMatrix, j: usize| -> f64 {
            (k..m).map(|i| r[(i, j)].norm_sqr()).sum()
        };
        let (pivot, pivot_norm2) = (k..n)
            .map(|j| (j, col_norm2(&r, j)))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_norm2 <= 0.0 {
            break;
        }
        if pivot != k {
            perm.swap(k, pivot);
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, pivot)];
                r[(i, pivot)] = tmp;
            }
        }

        let norm = pivot_norm2.sqrt();
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(Complex64::norm_sqr).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;

        // R <- H R on the trailing block.
        for j in k..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(l, vl)| vl.conj() * r[(k + l, j)])
                .sum();
            for (l, vl) in v.iter().enumerate() {
                r[(k + l, j)] -= vl * s * beta;
            }
        }
        // Q <- Q H.
        for i in 0..m {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(l, vl)| q[(i, k + l)] * vl)
                .sum();
            for (l, vl) in v.iter().enumerate() {
                q[(i, k + l)] -= s * vl.conj() * beta;
            }
        }
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = Complex64::zero();
        }
    }

    PivotedQr { q, r, perm }
}

/// Extends an orthonormal `m x r` basis to an `m x m` unitary whose leading
/// `r` columns are the basis itself.
pub(crate) fn complete_unitary(basis: &ComplexMatrix) -> ComplexMatrix {
    let (m, r) = basis.shape();
    let mut q = qr_column_pivoted(basis).q;
    for i in 0..m {
        for j in 0..r {
            q[(i, j)] = basis[(i, j)];
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::real;

    fn check_factorization(a: &ComplexMatrix) {
        let f = qr_column_pivoted(a);
        let ap = a * &f.permutation_matrix();
        let qr = &f.q * &f.r;
        assert!((&ap - &qr).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0));
        let qq = &f.q.adjoint() * &f.q;
        assert!((&qq - &ComplexMatrix::identity(a.rows())).frobenius_norm() < 1e-12);
        for i in 0..f.r.rows() {
            for j in 0..i.min(f.r.cols()) {
                assert_eq!(f.r[(i, j)], Complex64::zero());
            }
        }
        let p = a.rows().min(a.cols());
        for i in 1..p {
            assert!(f.r[(i, i)].norm() <= f.r[(i - 1, i - 1)].norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn identity_factors_trivially() {
        let f = qr_column_pivoted(&ComplexMatrix::identity(3));
        for i in 0..3 {
            assert!((f.q[(i, i)].norm() - 1.0).abs() < 1e-15);
            assert!((f.r[(i, i)].norm() - 1.0).abs() < 1e-15);
        }
        let q_abs = f.q.map(|z| Complex64::new(z.norm(), 0.0));
        assert_eq!(q_abs, ComplexMatrix::identity(3));
    }

    #[test]
    fn rank_one_shows_on_diagonal() {
        let a = real(&[&[1., 2.], &[2., 4.]]);
        let f = qr_column_pivoted(&a);
        let rtol = 4.0 * f64::EPSILON;
        assert!(f.r[(1, 1)].norm() <= rtol * f.r[(0, 0)].norm());
        assert_eq!(f.numerical_rank(rtol), 1);
        check_factorization(&a);
    }

    #[test]
    fn product_cubed_has_one_pivot() {
        // (AW)^3 for the 4x3 / 3x4 pair.
        let aw3 = real(&[&[1., 1., 2., 2.], &[0.; 4], &[0.; 4], &[0.; 4]]);
        assert_eq!(qr_column_pivoted(&aw3).numerical_rank(1e-10), 1);
    }

    #[test]
    fn complex_rectangular_factorizations() {
        for (m, n) in [(5, 3), (3, 5), (4, 4), (1, 3)] {
            let a = ComplexMatrix::from_fn(m, n, |i, j| {
                Complex64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64)
            });
            check_factorization(&a);
        }
    }

    #[test]
    fn completion_is_unitary_and_keeps_basis() {
        let s = 0.5f64.sqrt();
        let basis = real(&[&[s], &[s], &[0.]]);
        let u = complete_unitary(&basis);
        assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert_eq!(u.block(0, 0, 3, 1), basis);
    }
}
