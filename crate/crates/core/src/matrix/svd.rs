//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Column pairs are rotated until mutually orthogonal to working precision;
//! the column norms are then the singular values. Singular vectors of tiny
//! singular values stay orthogonal, which the rank-deficient inputs here need.

use num_complex::Complex64;

use super::{qr::complete_unitary, ComplexMatrix};
use crate::error::{Error, Result};
use crate::tolerance::ToleranceModel;

const MAX_SWEEPS: usize = 80;

/// Full singular value decomposition `A = U diag(σ) V*`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Unitary `m x m`.
    pub u: ComplexMatrix,
    /// Nonincreasing, length `min(m, n)`.
    pub singular_values: Vec<f64>,
    /// Unitary `n x n`.
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// `U Σ V*` with `Σ` the `m x n` diagonal matrix of singular values.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let sigma = ComplexMatrix::from_fn(m, n, |i, j| {
            if i == j {
                Complex64::new(self.singular_values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &(&self.u * &sigma) * &self.v.adjoint()
    }
}

/// Column-major working copy: `cols[j]` is column `j`.
fn columns(a: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)]).collect())
        .collect()
}

/// Jacobi sweeps on a tall (`m >= n`) matrix. Returns `(G, V)` with
/// `A V = G` and the columns of `G` mutually orthogonal.
fn jacobi(a: &ComplexMatrix) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
    let n = a.cols();
    // Inner products carry O(m eps) relative rounding error.
    let threshold = a.rows().max(1) as f64 * f64::EPSILON;
    let mut g = columns(a);
    let mut v = columns(&ComplexMatrix::identity(n));
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
        x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
    };
    let norm2 = |x: &[Complex64]| -> f64 { x.iter().map(Complex64::norm_sqr).sum() };

    // Columns below eps^2 ||A||_F are flushed to zero; otherwise they keep
    // shrinking geometrically without ever meeting the relative test.
    let floor = (f64::EPSILON * f64::EPSILON * a.frobenius_norm()).powi(2);

    for _sweep in 0..MAX_SWEEPS {
        for col in g.iter_mut() {
            if norm2(col) <= floor {
                col.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            }
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm2(&g[p]);
                let beta = norm2(&g[q]);
                let gamma = dot(&g[p], &g[q]);
                let gabs = gamma.norm();
                if gabs == 0.0 || gabs <= threshold * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // [x_p, x_q] <- [c x_p - s e^{-iφ} x_q, s e^{iφ} x_p + c x_q]
                let rotate = |cols: &mut Vec<Vec<Complex64>>| {
                    let (left, right) = cols.split_at_mut(q);
                    let (xp, xq) = (&mut left[p], &mut right[0]);
                    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
                        let (oa, ob) = (*a, *b);
                        *a = oa * c - phase.conj() * ob * s;
                        *b = phase * oa * s + ob * c;
                    }
                };
                rotate(&mut g);
                rotate(&mut v);
            }
        }
        if !rotated {
            return Ok((g, v));
        }
    }
    Err(Error::Numeric(format!(
        "Jacobi SVD of a {}x{} matrix did not converge in {MAX_SWEEPS} sweeps",
        a.rows(),
        n
    )))
}

/// Thin SVD sorted by decreasing singular value: `(U_thin, σ, V_thin)`.
///
/// Columns of `U_thin` belonging to exactly-zero singular values are zero.
fn thin_svd(a: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (m, n) = a.shape();
    if m < n {
        let (u, s, v) = thin_svd(&a.adjoint())?;
        return Ok((v, s, u));
    }
    if n == 0 {
        return Ok((ComplexMatrix::zeros(m, 0), Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    // Work at unit magnitude so squared norms neither underflow nor overflow.
    let peak = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !peak.is_finite() {
        return Err(Error::Numeric("SVD input has non-finite entries".into()));
    }
    let unit = if peak > 0.0 { a.map(|z| z / peak) } else { a.clone() };
    let (g, v) = jacobi(&unit)?;
    let norms: Vec<f64> = g
        .iter()
        .map(|c| peak * c.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric("SVD produced non-finite singular values".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sv: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = ComplexMatrix::from_fn(m, n, |i, j| {
        let s = sv[j];
        if s > 0.0 {
            g[order[j]][i] * (peak / s)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let v = ComplexMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Ok((u, sv, v))
}

/// Full SVD with unitary `U` and `V`.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    let (u, singular_values, v) = thin_svd(a)?;
    let nonzero = singular_values.iter().take_while(|&&s| s > 0.0).count();
    Ok(SvdResult {
        u: complete_unitary(&u.block(0, 0, u.rows(), nonzero)),
        singular_values,
        v: complete_unitary(&v.block(0, 0, v.rows(), nonzero)),
    })
}

pub(crate) fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(thin_svd(a)?.1)
}

/// Numerical rank: singular values above `rank_rtol * σ_max`.
pub fn rank(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<usize> {
    rank_at_scale(a, 0.0, tol)
}

/// Rank with the cutoff measured against `max(σ_max, scale)`.
///
/// `scale` is the nominal magnitude of a computed quantity (for a power
/// `B^j`, `σ_max(B)^j`), so that rounding residue of an exactly-singular
/// product is not mistaken for rank.
pub(crate) fn rank_at_scale(a: &ComplexMatrix, scale: f64, tol: &ToleranceModel) -> Result<usize> {
    let sv = singular_values(a)?;
    let reference = sv.first().copied().unwrap_or(0.0).max(scale);
    if reference == 0.0 {
        return Ok(0);
    }
    let cutoff = tol.rank_rtol * reference;
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Truncated-SVD pseudoinverse with the cutoff measured against `max(σ_max, scale)`.
pub(crate) fn pinv_at_scale(
    a: &ComplexMatrix,
    scale: f64,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let (m, n) = a.shape();
    let (u, sv, v) = thin_svd(a)?;
    let reference = sv.first().copied().unwrap_or(0.0).max(scale);
    let mut out = ComplexMatrix::zeros(n, m);
    if reference == 0.0 {
        return Ok(out);
    }
    let cutoff = tol.rank_rtol * reference;
    for (l, &s) in sv.iter().enumerate() {
        if s <= cutoff {
            break;
        }
        let inv = 1.0 / s;
        for i in 0..n {
            let vi = v[(i, l)] * inv;
            for j in 0..m {
                out[(i, j)] += vi * u[(j, l)].conj();
            }
        }
    }
    Ok(out)
}
