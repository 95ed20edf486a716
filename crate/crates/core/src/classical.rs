//! Generalized inverses of a single square matrix.
//!
//! Every inverse here except the Drazin and group inverses is an instance of the q-BT
//! inverse `A^{◇q} = (A P_{A^q})^†`: `q = 0` gives `A^†`, `q = 1` the BT
//! inverse and `q >= Ind(A)` the core-EP inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{pinv_at_scale, qr_column_pivoted, rank_at_scale, ComplexMatrix};
use crate::projectors::{
    matrix_index, nullspace_equal, pinv, power_range_projector_at_scale, power_scale,
    range_equal,
    spectral_norm,
};
use crate::tolerance::ToleranceModel;

/// Power `q` of the projector in `(A P_{A^q})^†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QbtParams {
    pub q: usize,
}

impl QbtParams {
    pub fn new(q: usize) -> Self {
        QbtParams { q }
    }
}

impl From<usize> for QbtParams {
    fn from(q: usize) -> Self {
        QbtParams { q }
    }
}

pub(crate) fn require_square(op: &'static str, a: &ComplexMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::shape(op, format!("{}x{} is not square", a.rows(), a.cols())))
    }
}

/// Drazin inverse, `k = Ind(A)`.
pub fn drazin(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    require_square("drazin", a)?;
    let k = matrix_index(a, tol)?.index;
    drazin_with_index(a, k, 0.0, tol)
}

/// Drazin inverse from the core-EP form `A = Q [[T, S], [0, N]] Q*` with
/// `R(Q_1) = R(A^k)`:
/// `A^d = Q [[T^{-1}, Σ_{j<k} T^{-(j+2)} S N^j], [0, 0]] Q*`.
///
/// Only the rank of `A^k` is decided numerically; the usual
/// `A^k (A^{2k+1})^† A^k` squares the conditioning of `A^k` and loses small
/// nonzero singular values of integer-valued products. The nominal norm of
/// `A` is taken as at least `base`.
pub(crate) fn drazin_with_index(
    a: &ComplexMatrix,
    k: usize,
    base: f64,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let n = a.rows();
    let ak = a.pow(k)?;
    let r = rank_at_scale(&ak, power_scale(spectral_norm(a)?, base, k), tol)?;
    let q = qr_column_pivoted(&ak).q;
    let c = &(&q.adjoint() * a) * &q;
    let t_inv = c
        .block(0, 0, r, r)
        .inverse()
        .map_err(|_| Error::Numeric("leading block of the core-EP form is singular".into()))?;
    let s = c.block(0, r, r, n - r);
    let nil = c.block(r, r, n - r, n - r);
    let mut tail = ComplexMatrix::zeros(r, n - r);
    let mut t_pow = &t_inv * &t_inv;
    let mut n_pow = ComplexMatrix::identity(n - r);
    for _ in 0..k {
        tail = &tail + &(&(&t_pow * &s) * &n_pow);
        t_pow = &t_pow * &t_inv;
        n_pow = &n_pow * &nil;
    }
    let inner = ComplexMatrix::from_blocks(
        &t_inv,
        &tail,
        &ComplexMatrix::zeros(n - r, r),
        &ComplexMatrix::zeros(n - r, n - r),
    )?;
    Ok(&(&q * &inner) * &q.adjoint())
}

/// Drazin inverse of a matrix of index at most one.
pub fn group_inverse(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    require_square("group_inverse", a)?;
    let k = matrix_index(a, tol)?.index;
    if k > 1 {
        return Err(Error::Domain(format!(
            "group inverse needs index at most 1, matrix has index {k}"
        )));
    }
    drazin_with_index(a, k, 0.0, tol)
}

/// Core inverse `A^# A A^†` of a matrix of index at most one.
pub fn core_inverse(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    let g = group_inverse(a, tol)?;
    Ok(&(&g * a) * &pinv(a, tol)?)
}

/// `A^{◇q} = (A P_{A^q})^†`.
pub fn qbt_inverse(
    a: &ComplexMatrix,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    qbt_inverse_at_scale(a, params.q, 0.0, tol)
}

/// `(A P_{A^q})^†` with the nominal norm of `A` at least `base`.
pub(crate) fn qbt_inverse_at_scale(
    a: &ComplexMatrix,
    q: usize,
    base: f64,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    require_square("qbt_inverse", a)?;
    let p = power_range_projector_at_scale(a, q, base, tol)?;
    pinv_at_scale(&(a * &p), spectral_norm(a)?.max(base), tol)
}

/// BT inverse `(A P_A)^†`.
pub fn bt_inverse(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    qbt_inverse(a, QbtParams::new(1), tol)
}

/// Core-EP inverse `(A P_{A^k})^†` with `k = Ind(A)`.
pub fn core_ep(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    require_square("core_ep", a)?;
    let k = matrix_index(a, tol)?.index;
    qbt_inverse(a, QbtParams::new(k), tol)
}

/// Whether `X` is the outer inverse of `A` with range `R(range_gen)` and null
/// space `N(null_gen)`: `XAX = X`, `R(X) = R(range_gen)`, `N(X) = N(null_gen)`.
pub fn outer_inverse_check(
    a: &ComplexMatrix,
    x: &ComplexMatrix,
    range_gen: &ComplexMatrix,
    null_gen: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Result<bool> {
    if x.shape() != (a.cols(), a.rows()) {
        return Err(Error::shape(
            "outer_inverse_check",
            format!("X is {}x{}, A is {}x{}", x.rows(), x.cols(), a.rows(), a.cols()),
        ));
    }
    let xax = x.try_mul(a)?.try_mul(x)?;
    Ok(tol.agrees(&xax, x) && range_equal(x, range_gen, tol)? && nullspace_equal(x, null_gen, tol)?)
}
