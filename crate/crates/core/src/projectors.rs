//! Moore-Penrose inverse, orthogonal projectors, matrix index and the
//! rank-based range / null-space predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pinv_at_scale, rank_at_scale, singular_values, ComplexMatrix};
use crate::tolerance::ToleranceModel;

/// Moore-Penrose inverse via truncated SVD with a relative cutoff.
pub fn pinv(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    pinv_at_scale(a, 0.0, tol)
}

/// Orthogonal projector `P_B = B B^†` onto `R(B)`.
pub fn proj_range(b: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    Ok(b * &pinv(b, tol)?)
}

/// Orthogonal projector `Q_B = B^† B` onto `R(B*)`.
pub fn proj_corange(b: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    Ok(&pinv(b, tol)? * b)
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// `B^q` with `B^0 = I`.
pub fn power(b: &ComplexMatrix, q: usize) -> Result<ComplexMatrix> {
    b.pow(q)
}

/// `P_{B^q}`, deciding the rank of `B^q` against its nominal scale `‖B‖_2^q`.
///
/// For `q = 0` this is the identity.
pub fn power_range_projector(
    b: &ComplexMatrix,
    q: usize,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    power_range_projector_at_scale(b, q, 0.0, tol)
}

/// As [`power_range_projector`] with the nominal norm of `B` taken as at
/// least `base` (for `B = AW`, `base = ‖A‖_2 ‖W‖_2`).
pub(crate) fn power_range_projector_at_scale(
    b: &ComplexMatrix,
    q: usize,
    base: f64,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let bq = b.pow(q)?;
    let scale = power_scale(spectral_norm(b)?, base, q);
    Ok(&bq * &pinv_at_scale(&bq, scale, tol)?)
}

/// Nominal norm of a computed `B^j`: `max(‖B‖, base) ‖B‖^{j-1}`.
///
/// `base` bounds the factors `B` was formed from, so rounding residue of an
/// exactly-zero product stays below the cutoff at every power.
pub(crate) fn power_scale(norm: f64, base: f64, j: usize) -> f64 {
    if j == 0 {
        1.0
    } else {
        norm.max(base) * norm.powi(j as i32 - 1)
    }
}

/// Index of a square matrix together with the ranks that determined it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub index: usize,
    /// `rank(B^j)` for `j = 0..=index + 1`.
    pub rank_sequence: Vec<usize>,
}

/// Smallest `k >= 0` with `rank(B^k) = rank(B^{k+1})`, searched up to `k = n`.
///
/// Ranks of powers are judged against `‖B‖_2^j` so that the rounding
/// residue of a vanishing power does not count as rank.
pub fn matrix_index(b: &ComplexMatrix, tol: &ToleranceModel) -> Result<IndexReport> {
    matrix_index_at_scale(b, 0.0, tol)
}

/// As [`matrix_index`] with the nominal norm of `B` taken as at least `base`.
///
/// A product such as `AW` can vanish in exact arithmetic yet come out as
/// rounding residue; only the norms of the factors reveal that.
pub(crate) fn matrix_index_at_scale(
    b: &ComplexMatrix,
    base: f64,
    tol: &ToleranceModel,
) -> Result<IndexReport> {
    if !b.is_square() {
        return Err(Error::shape(
            "matrix_index",
            format!("{}x{} is not square", b.rows(), b.cols()),
        ));
    }
    let n = b.rows();
    let norm = spectral_norm(b)?;
    let mut ranks = vec![n];
    let mut pw = ComplexMatrix::identity(n);
    for j in 1..=n + 1 {
        pw = &pw * b;
        let r = rank_at_scale(&pw, power_scale(norm, base, j), tol)?;
        ranks.push(r);
        if r == ranks[j - 1] {
            return Ok(IndexReport {
                index: j - 1,
                rank_sequence: ranks,
            });
        }
    }
    // A noisy rank sequence that never settles; the index of an n x n matrix is at most n.
    ranks.truncate(n + 2);
    Ok(IndexReport {
        index: n,
        rank_sequence: ranks,
    })
}

fn joint_reference(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<f64> {
    Ok(spectral_norm(x)?.max(spectral_norm(y)?))
}

/// `R(X) ⊆ R(Y)`, decided as `rank([Y | X]) = rank(Y)`.
///
/// Both ranks share one cutoff, measured against the larger of the two
/// spectral norms.
pub fn range_contained(x: &ComplexMatrix, y: &ComplexMatrix, tol: &ToleranceModel) -> Result<bool> {
    if x.rows() != y.rows() {
        return Err(Error::shape(
            "range_contained",
            format!("X has {} rows, Y has {}", x.rows(), y.rows()),
        ));
    }
    let reference = joint_reference(x, y)?;
    let joint = rank_at_scale(&y.hstack(x)?, reference, tol)?;
    Ok(joint == rank_at_scale(y, reference, tol)?)
}

/// `N(Y) ⊆ N(X)`, decided as `rank([Y; X]) = rank(Y)`.
pub fn nullspace_contained(
    y: &ComplexMatrix,
    x: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Result<bool> {
    if x.cols() != y.cols() {
        return Err(Error::shape(
            "nullspace_contained",
            format!("X has {} columns, Y has {}", x.cols(), y.cols()),
        ));
    }
    let reference = joint_reference(x, y)?;
    let joint = rank_at_scale(&y.vstack(x)?, reference, tol)?;
    Ok(joint == rank_at_scale(y, reference, tol)?)
}

pub fn range_equal(x: &ComplexMatrix, y: &ComplexMatrix, tol: &ToleranceModel) -> Result<bool> {
    Ok(range_contained(x, y, tol)? && range_contained(y, x, tol)?)
}

pub fn nullspace_equal(x: &ComplexMatrix, y: &ComplexMatrix, tol: &ToleranceModel) -> Result<bool> {
    Ok(nullspace_contained(x, y, tol)? && nullspace_contained(y, x, tol)?)
}
