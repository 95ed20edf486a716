//! Core-EP decompositions and the block forms of the q-BT inverses built on
//! them.
//!
//! Square case: `A = U [[T, S], [0, N]] U*` with `T` nonsingular and `N`
//! nilpotent. Weighted case: `A = U [[A1, A2], [0, A3]] V*` and
//! `W = V [[W1, W2], [0, W3]] U*` with `A1`, `W1` nonsingular and `A3 W3`,
//! `W3 A3` nilpotent.

use serde::{Deserialize, Serialize};

use crate::classical::{qbt_inverse_at_scale, require_square, QbtParams};
use crate::error::{Error, Result};
use crate::matrix::{
    pinv_at_scale, qr_column_pivoted, rank_at_scale, singular_values, ComplexMatrix,
};
use crate::projectors::{
    matrix_index_at_scale, power_range_projector_at_scale, power_scale, proj_range,
    spectral_norm,
};
use crate::tolerance::ToleranceModel;
use crate::weighted::{weighted_qbt_raw, WeightedPair};

/// `U [[tl, tr], [bl, br]] V*`.
fn frame(
    u: &ComplexMatrix,
    blocks: [&ComplexMatrix; 4],
    v: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let [tl, tr, bl, br] = blocks;
    let inner = ComplexMatrix::from_blocks(tl, tr, bl, br)?;
    Ok(&(u * &inner) * &v.adjoint())
}

fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.cols())).frobenius_norm()
}

fn sigma_min(a: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(a)?.last().copied().unwrap_or(f64::INFINITY))
}

fn invert_block(op: &'static str, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.inverse().map_err(|_| Error::Decomposition {
        check: op,
        residual: f64::INFINITY,
        threshold: 0.0,
    })
}

fn require(check: &'static str, residual: f64, threshold: f64) -> Result<()> {
    if residual <= threshold {
        Ok(())
    } else {
        Err(Error::Decomposition {
            check,
            residual,
            threshold,
        })
    }
}

/// Orthonormal basis of `R(B)` (first `r` columns) completed to a unitary.
fn range_unitary(b: &ComplexMatrix, scale: f64, tol: &ToleranceModel) -> Result<(ComplexMatrix, usize)> {
    let r = rank_at_scale(b, scale, tol)?;
    Ok((qr_column_pivoted(b).q, r))
}

/// `A = U [[T, S], [0, N]] U*`.
#[derive(Debug, Clone)]
pub struct CoreEpDecomposition {
    pub u: ComplexMatrix,
    pub t: ComplexMatrix,
    pub s: ComplexMatrix,
    pub nil: ComplexMatrix,
    /// `Ind(A)`, also the nilpotency index of `N`.
    pub index: usize,
    /// Nominal `‖A‖_2`, the reference for rank decisions on the blocks.
    pub norm: f64,
}

impl CoreEpDecomposition {
    /// `rank(A^k)`, the size of `T`.
    pub fn rank(&self) -> usize {
        self.t.rows()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let z = ComplexMatrix::zeros(self.nil.rows(), self.t.cols());
        frame(&self.u, [&self.t, &self.s, &z, &self.nil], &self.u).expect("consistent blocks")
    }
}

pub fn core_ep_decompose(a: &ComplexMatrix, tol: &ToleranceModel) -> Result<CoreEpDecomposition> {
    core_ep_decompose_at_scale(a, 0.0, tol)
}

/// As [`core_ep_decompose`] with the nominal norm of `A` taken as at least
/// `base`, for products such as `AW` whose factors bound their size.
pub fn core_ep_decompose_at_scale(
    a: &ComplexMatrix,
    base: f64,
    tol: &ToleranceModel,
) -> Result<CoreEpDecomposition> {
    require_square("core_ep_decompose", a)?;
    let n = a.rows();
    let k = matrix_index_at_scale(a, base, tol)?.index;
    let norm = spectral_norm(a)?.max(base);
    let (u, r) = range_unitary(&a.pow(k)?, power_scale(spectral_norm(a)?, base, k), tol)?;
    let c = &(&u.adjoint() * a) * &u;
    let d = CoreEpDecomposition {
        t: c.block(0, 0, r, r),
        s: c.block(0, r, r, n - r),
        nil: c.block(r, r, n - r, n - r),
        u,
        index: k,
        norm,
    };
    let atol = tol.residual_atol;
    require("unitary U", unitarity_residual(&d.u), atol)?;
    require("reconstruction", d.reconstruct().relative_distance(a), atol)?;
    let nil_k = (d.nil.pow(k)?.frobenius_norm()) / power_scale(norm, base, k).max(1.0);
    require("nilpotency of N", nil_k, atol)?;
    if r > 0 && sigma_min(&d.t)? <= tol.rank_rtol * norm {
        return Err(Error::Decomposition {
            check: "nonsingular T",
            residual: sigma_min(&d.t)?,
            threshold: tol.rank_rtol * norm,
        });
    }
    Ok(d)
}

/// Residuals measured while validating a [`WeightedCoreEpDecomposition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResiduals {
    pub unitary_u: f64,
    pub unitary_v: f64,
    /// Relative Frobenius error of `U [[A1, A2], [0, A3]] V*` against `A`.
    pub reconstruct_a: f64,
    pub reconstruct_w: f64,
    /// `‖(A3 W3)^{Ind(AW)}‖_F` over the nominal size of `(AW)^{Ind(AW)}`.
    pub nilpotent_aw: f64,
    pub nilpotent_wa: f64,
    pub sigma_min_a1: f64,
    pub sigma_min_w1: f64,
}

impl DecompositionResiduals {
    /// Largest of the residuals that must vanish.
    pub fn max_residual(&self) -> f64 {
        [
            self.unitary_u,
            self.unitary_v,
            self.reconstruct_a,
            self.reconstruct_w,
            self.nilpotent_aw,
            self.nilpotent_wa,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct WeightedCoreEpDecomposition {
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
    pub a3: ComplexMatrix,
    pub w1: ComplexMatrix,
    pub w2: ComplexMatrix,
    pub w3: ComplexMatrix,
    /// `rank((AW)^k)`.
    pub t_dim: usize,
    pub ind_aw: usize,
    pub ind_wa: usize,
    /// Nominal `‖A‖_2` and `‖W‖_2`.
    pub norm_a: f64,
    pub norm_w: f64,
    pub residuals: DecompositionResiduals,
}

impl WeightedCoreEpDecomposition {
    pub fn reconstruct_a(&self) -> ComplexMatrix {
        let z = ComplexMatrix::zeros(self.a3.rows(), self.t_dim);
        frame(&self.u, [&self.a1, &self.a2, &z, &self.a3], &self.v).expect("consistent blocks")
    }

    pub fn reconstruct_w(&self) -> ComplexMatrix {
        let z = ComplexMatrix::zeros(self.w3.rows(), self.t_dim);
        frame(&self.v, [&self.w1, &self.w2, &z, &self.w3], &self.u).expect("consistent blocks")
    }

    /// `AW = U [[A1 W1, A1 W2 + A2 W3], [0, A3 W3]] U*` as a square decomposition.
    pub fn aw_blocks(&self) -> CoreEpDecomposition {
        CoreEpDecomposition {
            u: self.u.clone(),
            t: &self.a1 * &self.w1,
            s: &(&self.a1 * &self.w2) + &(&self.a2 * &self.w3),
            nil: &self.a3 * &self.w3,
            index: self.ind_aw,
            norm: self.norm_a * self.norm_w,
        }
    }

    /// `WA = V [[W1 A1, W1 A2 + W2 A3], [0, W3 A3]] V*` as a square decomposition.
    pub fn wa_blocks(&self) -> CoreEpDecomposition {
        CoreEpDecomposition {
            u: self.v.clone(),
            t: &self.w1 * &self.a1,
            s: &(&self.w1 * &self.a2) + &(&self.w2 * &self.a3),
            nil: &self.w3 * &self.a3,
            index: self.ind_wa,
            norm: self.norm_a * self.norm_w,
        }
    }
}

pub fn weighted_core_ep_decompose(
    p: &WeightedPair,
    tol: &ToleranceModel,
) -> Result<WeightedCoreEpDecomposition> {
    let (a, w) = (p.a(), p.w());
    let (m, n) = a.shape();
    let k = p.k();
    let (na, nw) = (spectral_norm(a)?, spectral_norm(w)?);
    let base = na * nw;
    let aw = p.aw();
    let wa = p.wa();
    let (u, t) = range_unitary(&aw.pow(k)?, power_scale(spectral_norm(&aw)?, base, k), tol)?;
    let (v, t_wa) = range_unitary(&wa.pow(k)?, power_scale(spectral_norm(&wa)?, base, k), tol)?;
    if t != t_wa {
        return Err(Error::Decomposition {
            check: "rank((AW)^k) = rank((WA)^k)",
            residual: t.abs_diff(t_wa) as f64,
            threshold: 0.0,
        });
    }
    let ca = &(&u.adjoint() * a) * &v;
    let cw = &(&v.adjoint() * w) * &u;
    let mut d = WeightedCoreEpDecomposition {
        a1: ca.block(0, 0, t, t),
        a2: ca.block(0, t, t, n - t),
        a3: ca.block(t, t, m - t, n - t),
        w1: cw.block(0, 0, t, t),
        w2: cw.block(0, t, t, m - t),
        w3: cw.block(t, t, n - t, m - t),
        u,
        v,
        t_dim: t,
        ind_aw: p.ind_aw(),
        ind_wa: p.ind_wa(),
        norm_a: na,
        norm_w: nw,
        residuals: DecompositionResiduals {
            unitary_u: 0.0,
            unitary_v: 0.0,
            reconstruct_a: 0.0,
            reconstruct_w: 0.0,
            nilpotent_aw: 0.0,
            nilpotent_wa: 0.0,
            sigma_min_a1: 0.0,
            sigma_min_w1: 0.0,
        },
    };
    let nil = |b: &ComplexMatrix, j: usize| -> Result<f64> {
        Ok(b.pow(j)?.frobenius_norm() / power_scale(base, base, j).max(1.0))
    };
    let r = DecompositionResiduals {
        unitary_u: unitarity_residual(&d.u),
        unitary_v: unitarity_residual(&d.v),
        reconstruct_a: d.reconstruct_a().relative_distance(a),
        reconstruct_w: d.reconstruct_w().relative_distance(w),
        nilpotent_aw: nil(&(&d.a3 * &d.w3), d.ind_aw)?,
        nilpotent_wa: nil(&(&d.w3 * &d.a3), d.ind_wa)?,
        sigma_min_a1: sigma_min(&d.a1)?,
        sigma_min_w1: sigma_min(&d.w1)?,
    };
    d.residuals = r;
    let atol = tol.residual_atol;
    require("unitary U", r.unitary_u, atol)?;
    require("unitary V", r.unitary_v, atol)?;
    require("reconstruction of A", r.reconstruct_a, atol)?;
    require("reconstruction of W", r.reconstruct_w, atol)?;
    require("nilpotency of A3 W3", r.nilpotent_aw, atol)?;
    require("nilpotency of W3 A3", r.nilpotent_wa, atol)?;
    if t > 0 && (r.sigma_min_a1 <= tol.rank_rtol * na || r.sigma_min_w1 <= tol.rank_rtol * nw) {
        return Err(Error::Decomposition {
            check: "nonsingular A1 and W1",
            residual: r.sigma_min_a1.min(r.sigma_min_w1),
            threshold: tol.rank_rtol * na.max(nw),
        });
    }
    Ok(d)
}

/// `A^†` for `A = U [[A1, A2], [0, A3]] V*` with `A1` nonsingular, via
/// `Ω = [A1 A1* + A2 (I - Q_{A3}) A2*]^{-1}`.
pub fn block_pinv(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let t = a1.rows();
    if !a1.is_square()
        || a2.rows() != t
        || a3.cols() != a2.cols()
        || u.rows() != t + a3.rows()
        || v.rows() != t + a3.cols()
    {
        return Err(Error::shape(
            "block_pinv",
            format!(
                "A1 {:?}, A2 {:?}, A3 {:?}, U {:?}, V {:?} do not fit together",
                a1.shape(),
                a2.shape(),
                a3.shape(),
                u.shape(),
                v.shape()
            ),
        ));
    }
    let scale = block_scale(a1, a2, a3)?;
    if t > 0 && sigma_min(a1)? <= tol.rank_rtol * scale {
        return Err(Error::Domain("A1 is singular".into()));
    }
    let a3_pinv = pinv_at_scale(a3, scale, tol)?;
    let comp = &ComplexMatrix::identity(a3.cols()) - &(&a3_pinv * a3);
    let a1s = a1.adjoint();
    let omega = (&(a1 * &a1s) + &(&(a2 * &comp) * &a2.adjoint()))
        .inverse()
        .map_err(|_| Error::Domain("A1 A1* + A2 (I - Q_A3) A2* is singular".into()))?;
    let coupling = &(&omega * a2) * &a3_pinv;
    let comp_a2s = &comp * &a2.adjoint();
    let x11 = &a1s * &omega;
    let x12 = -&(&a1s * &coupling);
    let x21 = &comp_a2s * &omega;
    let x22 = &a3_pinv - &(&comp_a2s * &coupling);
    // A^† = V X U*
    frame(v, [&x11, &x12, &x21, &x22], u)
}

/// Largest block norm, the reference for rank decisions on `A3`.
fn block_scale(a1: &ComplexMatrix, a2: &ComplexMatrix, a3: &ComplexMatrix) -> Result<f64> {
    Ok(spectral_norm(a1)?.max(spectral_norm(a2)?).max(spectral_norm(a3)?))
}

/// `P_A = U diag(I_t, P_{A3}) U*` for `A = U [[A1, A2], [0, A3]] V*` with
/// `A1` (t x t) nonsingular.
pub fn block_range_projector(
    u: &ComplexMatrix,
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    a3: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let t = a1.rows();
    if u.rows() != t + a3.rows() {
        return Err(Error::shape(
            "block_range_projector",
            format!("U is {:?} but the blocks have {} rows", u.shape(), t + a3.rows()),
        ));
    }
    let a3_pinv = pinv_at_scale(a3, block_scale(a1, a2, a3)?, tol)?;
    let inner = ComplexMatrix::identity(t).block_diag(&(a3 * &a3_pinv));
    Ok(&(u * &inner) * &u.adjoint())
}

/// Intermediate blocks of a canonical form.
#[derive(Debug, Clone)]
pub struct CanonicalParts {
    /// `M = W1 A1 W2 + W1 A2 W3 + W2 A3 W3` (weighted) or `S` (square).
    pub m_block: ComplexMatrix,
    /// `Ω_W`, weighted case only.
    pub omega: Option<ComplexMatrix>,
    /// `Δ`, square case only.
    pub delta: Option<ComplexMatrix>,
}

/// `A^{◇q,W}` from a weighted core-EP decomposition.
pub fn canonical_weighted_qbt(
    d: &WeightedCoreEpDecomposition,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, CanonicalParts)> {
    let q = params.q;
    let (a1, a2, a3) = (&d.a1, &d.a2, &d.a3);
    let (w1, w2, w3) = (&d.w1, &d.w2, &d.w3);
    let w1a1 = w1 * a1;
    let core = &w1a1 * w1;
    let m = &(&(&w1a1 * w2) + &(&(w1 * a2) * w3)) + &(&(w2 * a3) * w3);
    let norms = (d.norm_a, d.norm_w);
    let a3_qbt = weighted_qbt_raw(a3, w3, q, norms, tol)?;
    let z = trailing_z(a3, w3, &a3_qbt, q, norms, tol)?;
    let core_s = core.adjoint();
    let omega = invert_block(
        "Ω_W nonsingular",
        &(&(&core * &core_s) + &(&(&m * &z) * &m.adjoint())),
    )?;
    let zms_omega = &(&z * &m.adjoint()) * &omega;
    let m_a3 = &m * &a3_qbt;
    let x11 = &core_s * &omega;
    let x12 = -&(&x11 * &m_a3);
    let x22 = &a3_qbt - &(&zms_omega * &m_a3);
    let x = frame(&d.u, [&x11, &x12, &zms_omega, &x22], &d.v)?;
    Ok((
        x,
        CanonicalParts {
            m_block: m,
            omega: Some(omega),
            delta: None,
        },
    ))
}

/// `Z = P_{(A3 W3)^q} - P_{A3^{◇q,W3}}`.
fn trailing_z(
    a3: &ComplexMatrix,
    w3: &ComplexMatrix,
    a3_qbt: &ComplexMatrix,
    q: usize,
    (norm_a, norm_w): (f64, f64),
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let base = spectral_norm(a3)?.max(norm_a) * spectral_norm(w3)?.max(norm_w);
    let p = power_range_projector_at_scale(&(a3 * w3), q, base, tol)?;
    Ok(&p - &proj_range(a3_qbt, tol)?)
}

/// `A^{◇q}` from `U [[T, S], [0, N]] U*` with
/// `Δ = (T T* + S (P_{N^q} - P_{N^{◇q}}) S*)^{-1}`.
fn canonical_square(
    d: &CoreEpDecomposition,
    q: usize,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (t, s, nil) = (&d.t, &d.s, &d.nil);
    let base = d.norm;
    let nil_qbt = qbt_inverse_at_scale(nil, q, base, tol)?;
    let p = power_range_projector_at_scale(nil, q, base, tol)?;
    let z = &p - &proj_range(&nil_qbt, tol)?;
    let ts = t.adjoint();
    let delta = invert_block("Δ nonsingular", &(&(t * &ts) + &(&(s * &z) * &s.adjoint())))?;
    let zss_delta = &(&z * &s.adjoint()) * &delta;
    let s_nil = s * &nil_qbt;
    let x11 = &ts * &delta;
    let x12 = -&(&x11 * &s_nil);
    let x22 = &nil_qbt - &(&zss_delta * &s_nil);
    Ok((frame(&d.u, [&x11, &x12, &zss_delta, &x22], &d.u)?, delta))
}

/// `A^{◇q}` from a core-EP decomposition.
pub fn canonical_qbt(
    d: &CoreEpDecomposition,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, CanonicalParts)> {
    let (x, delta) = canonical_square(d, params.q, tol)?;
    Ok((
        x,
        CanonicalParts {
            m_block: d.s.clone(),
            omega: None,
            delta: Some(delta),
        },
    ))
}

/// `((AW)^{◇q}, (WA)^{◇q})` from the blocks of a weighted decomposition.
pub fn canonical_qbt_products(
    d: &WeightedCoreEpDecomposition,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let (aw, _) = canonical_square(&d.aw_blocks(), params.q, tol)?;
    let (wa, _) = canonical_square(&d.wa_blocks(), params.q, tol)?;
    Ok((aw, wa))
}

/// `P (I - Q_{W3 A3 W3 P}) P` with `P = P_{(A3 W3)^q}`, the unsimplified form
/// of the `Z` used by [`canonical_weighted_qbt`].
fn trailing_z_unsimplified(
    a3: &ComplexMatrix,
    w3: &ComplexMatrix,
    q: usize,
    (norm_a, norm_w): (f64, f64),
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let (na, nw) = (spectral_norm(a3)?.max(norm_a), spectral_norm(w3)?.max(norm_w));
    let p = power_range_projector_at_scale(&(a3 * w3), q, na * nw, tol)?;
    let g = &(&(w3 * a3) * w3) * &p;
    let nominal = nw * nw * na;
    let q_g = &pinv_at_scale(&g, nominal, tol)? * &g;
    let comp = &ComplexMatrix::identity(p.rows()) - &q_g;
    Ok(&(&p * &comp) * &p)
}

/// Relative distance between the two forms of `Z` for the trailing blocks of `d`.
pub(crate) fn trailing_z_gap(
    d: &WeightedCoreEpDecomposition,
    q: usize,
    tol: &ToleranceModel,
) -> Result<f64> {
    let norms = (d.norm_a, d.norm_w);
    let a3_qbt = weighted_qbt_raw(&d.a3, &d.w3, q, norms, tol)?;
    let z = trailing_z(&d.a3, &d.w3, &a3_qbt, q, norms, tol)?;
    Ok(z.relative_distance(&trailing_z_unsimplified(&d.a3, &d.w3, q, norms, tol)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{core_ep, qbt_inverse};
    use crate::exact::float_of;
    use crate::fixtures;
    use crate::matrix::real;
    use crate::projectors::pinv;
    use crate::random::{self, NilBlock};
    use crate::weighted::{product_qbt_inverses, weighted_bt, weighted_core_ep, weighted_qbt};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceModel {
        ToleranceModel::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && a.relative_distance(b) <= eps
    }

    fn small() -> WeightedPair {
        let (a, w) = fixtures::small_pair();
        WeightedPair::new(float_of(&a).unwrap(), float_of(&w).unwrap(), &tol()).unwrap()
    }

    fn corpus(seed: u64, count: usize) -> Vec<WeightedPair> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|i| {
                let p = random::planted_pair(&mut rng, 1 + i % 3, 8, false);
                WeightedPair::new(p.a, p.w, &tol()).unwrap()
            })
            .collect()
    }

    #[test]
    fn square_decomposition_edge_cases() {
        let t = tol();
        let a = real(&[&[2., 1.], &[1., 3.]]);
        let d = core_ep_decompose(&a, &t).unwrap();
        assert_eq!((d.rank(), d.nil.shape()), (2, (0, 0)));
        let j = real(&[&[0., 1.], &[0., 0.]]);
        let d = core_ep_decompose(&j, &t).unwrap();
        assert_eq!((d.rank(), d.index), (0, 2));
        assert!(close(&d.reconstruct(), &j, 1e-15));
        let (x, _) = canonical_qbt(&d, 1.into(), &t).unwrap();
        assert!(close(&x, &qbt_inverse(&j, 1.into(), &t).unwrap(), 1e-14));
    }

    #[test]
    fn square_decomposition_of_product() {
        let p = small();
        let d = core_ep_decompose(&p.aw(), &tol()).unwrap();
        assert_eq!((d.rank(), d.index, d.nil.shape()), (1, 3, (3, 3)));
        assert!(d.nil.pow(2).unwrap().frobenius_norm() > 0.1);
    }

    #[test]
    fn weighted_decomposition_of_fixtures() {
        let t = tol();
        let d = weighted_core_ep_decompose(&small(), &t).unwrap();
        assert_eq!(d.t_dim, 1);
        assert!(d.a1[(0, 0)].norm() > 0.1 && d.w1[(0, 0)].norm() > 0.1);
        let (a, w) = fixtures::counter_pair();
        let p = WeightedPair::new(float_of(&a).unwrap(), float_of(&w).unwrap(), &t).unwrap();
        let d = weighted_core_ep_decompose(&p, &t).unwrap();
        let aw3 = p.aw().pow(3).unwrap();
        assert_eq!(d.t_dim, crate::matrix::rank(&aw3, &t).unwrap());
    }

    #[test]
    fn identity_weight_matches_square_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let t = tol();
        let a = &random::with_rank(&mut rng, 5, 5, 3) * &random::with_rank(&mut rng, 5, 5, 4);
        let p = WeightedPair::new(a.clone(), ComplexMatrix::identity(5), &t).unwrap();
        let d = weighted_core_ep_decompose(&p, &t).unwrap();
        let s = core_ep_decompose(&a, &t).unwrap();
        assert_eq!(d.t_dim, s.rank());
        assert!(d.residuals.max_residual() < 1e-12);
    }

    #[test]
    fn corpus_decompositions_are_valid() {
        let t = tol();
        for p in corpus(42, 40) {
            let d = weighted_core_ep_decompose(&p, &t).unwrap();
            assert!(d.residuals.max_residual() < 1e-12, "{:?}", d.residuals);
            // AW = U [[A1 W1, A1 W2 + A2 W3], [0, A3 W3]] U*
            assert!(close(&d.aw_blocks().reconstruct(), &p.aw(), 1e-12));
            assert!(close(&d.wa_blocks().reconstruct(), &p.wa(), 1e-12));
        }
    }

    #[test]
    fn canonical_forms_agree_with_direct_formula() {
        let t = tol();
        for p in corpus(43, 30) {
            let d = weighted_core_ep_decompose(&p, &t).unwrap();
            for q in 0..=p.k() + 1 {
                let direct = weighted_qbt(&p, q.into(), &t).unwrap();
                let (x, parts) = canonical_weighted_qbt(&d, q.into(), &t).unwrap();
                assert!(close(&x, &direct, 1e-9), "q = {q}: {}", x.relative_distance(&direct));
                assert_eq!(parts.m_block.shape(), (d.t_dim, p.a().rows() - d.t_dim));
                let (aw, wa) = canonical_qbt_products(&d, q.into(), &t).unwrap();
                let (aw_direct, wa_direct) = product_qbt_inverses(&p, q.into(), &t).unwrap();
                assert!(close(&aw, &aw_direct, 1e-9));
                assert!(close(&wa, &wa_direct, 1e-9));
            }
        }
    }

    #[test]
    fn canonical_reductions() {
        let t = tol();
        let p = small();
        let d = weighted_core_ep_decompose(&p, &t).unwrap();
        let (x, _) = canonical_weighted_qbt(&d, 2.into(), &t).unwrap();
        let expected = real(&[&[0.5, 0., 0.], &[0.5, 0., 0.], &[0.; 3], &[0.; 3]]);
        assert!(close(&x, &expected, 1e-10));
        let (x1, _) = canonical_weighted_qbt(&d, 1.into(), &t).unwrap();
        assert!(close(&x1, &weighted_bt(&p, &t).unwrap(), 1e-10));
        // q >= k: U diag((W1 A1 W1)^{-1}, 0) V*
        let core = (&(&d.w1 * &d.a1) * &d.w1).inverse().unwrap();
        let inner = core.block_diag(&ComplexMatrix::zeros(d.a3.rows(), d.a3.cols()));
        let cep = &(&d.u * &inner) * &d.v.adjoint();
        for q in 3..6 {
            let (x, _) = canonical_weighted_qbt(&d, q.into(), &t).unwrap();
            assert!(close(&x, &cep, 1e-10));
        }
        assert!(close(&cep, &weighted_core_ep(&p, &t).unwrap(), 1e-10));
    }

    #[test]
    fn trailing_z_simplifies() {
        let t = tol();
        for p in corpus(44, 30) {
            let d = weighted_core_ep_decompose(&p, &t).unwrap();
            for q in 0..=p.k() + 1 {
                let norms = (d.norm_a, d.norm_w);
                let a3q = weighted_qbt_raw(&d.a3, &d.w3, q, norms, &t).unwrap();
                let z = trailing_z(&d.a3, &d.w3, &a3q, q, norms, &t).unwrap();
                let full = trailing_z_unsimplified(&d.a3, &d.w3, q, norms, &t).unwrap();
                assert!((&z - &full).frobenius_norm() < 1e-9);
            }
        }
    }

    #[test]
    fn square_canonical_form_on_planted_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let t = tol();
        for k in 1..=3 {
            for _ in 0..5 {
                let pp = random::planted_pair_from(&mut rng, 2, &[NilBlock::Square(k)], false);
                let a = &pp.a * &pp.w;
                let d = core_ep_decompose(&a, &t).unwrap();
                assert_eq!(d.index, k);
                for q in 0..=k + 1 {
                    let (x, parts) = canonical_qbt(&d, q.into(), &t).unwrap();
                    assert!(close(&x, &qbt_inverse(&a, q.into(), &t).unwrap(), 1e-9));
                    assert!(parts.delta.is_some());
                }
                let tinv = d.t.inverse().unwrap();
                let inner = tinv.block_diag(&ComplexMatrix::zeros(k, k));
                let cep = &(&d.u * &inner) * &d.u.adjoint();
                assert!(close(&cep, &core_ep(&a, &t).unwrap(), 1e-9));
            }
        }
    }

    fn block_triangular(rng: &mut ChaCha8Rng, t: usize, m3: usize, n3: usize, r3: usize)
        -> [ComplexMatrix; 5] {
        [
            random::unitary(rng, t + m3),
            random::unitary(rng, t + n3),
            random::with_spectrum(rng, t, 0.5, 2.0),
            random::gaussian(rng, t, n3),
            random::with_rank(rng, m3, n3, r3),
        ]
    }

    #[test]
    fn block_pinv_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let t = tol();
        for (td, m3, n3, r3) in [(2, 3, 2, 1), (1, 2, 4, 2), (3, 0, 2, 0), (0, 3, 3, 2), (2, 2, 2, 2)] {
            let [u, v, a1, a2, a3] = block_triangular(&mut rng, td, m3, n3, r3);
            let z = ComplexMatrix::zeros(m3, td);
            let a = frame(&u, [&a1, &a2, &z, &a3], &v).unwrap();
            let x = block_pinv(&u, &v, &a1, &a2, &a3, &t).unwrap();
            assert!(close(&x, &pinv(&a, &t).unwrap(), 1e-10));
            let pa = block_range_projector(&u, &a1, &a2, &a3, &t).unwrap();
            assert!(close(&pa, &proj_range(&a, &t).unwrap(), 1e-10));
        }
    }

    #[test]
    fn block_pinv_special_cases() {
        let t = tol();
        let a1 = real(&[&[2., 1.], &[0., 1.]]);
        let id = ComplexMatrix::identity(3);
        let x = block_pinv(&id, &id, &real(&[&[4.]]), &ComplexMatrix::zeros(1, 2), &ComplexMatrix::zeros(2, 2), &t)
            .unwrap();
        assert!(close(&x, &real(&[&[0.25, 0., 0.], &[0.; 3], &[0.; 3]]), 1e-15));
        let i4 = ComplexMatrix::identity(4);
        let a3 = real(&[&[1., 2.], &[0., 3.]]);
        let a2 = real(&[&[1., 1.], &[1., 0.]]);
        let x = block_pinv(&i4, &i4, &a1, &a2, &a3, &t).unwrap();
        assert!(close(&x.block(0, 0, 2, 2), &a1.inverse().unwrap(), 1e-14));
        assert!(matches!(
            block_pinv(&i4, &i4, &ComplexMatrix::zeros(2, 2), &a2, &a3, &t),
            Err(Error::Domain(_))
        ));
    }
}
