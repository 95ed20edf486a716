//! W-weighted generalized inverses of a rectangular `A` (m x n) with a weight
//! `W` (n x m).

use crate::classical::{drazin_with_index, qbt_inverse_at_scale, QbtParams};
use crate::error::{Error, Result};
use crate::matrix::{pinv_at_scale, ComplexMatrix};
use crate::projectors::{
    matrix_index_at_scale, pinv, power_range_projector_at_scale, power_scale, spectral_norm,
};
use crate::tolerance::ToleranceModel;

/// A validated pair `(A, W)` with its indices.
#[derive(Debug, Clone)]
pub struct WeightedPair {
    a: ComplexMatrix,
    w: ComplexMatrix,
    ind_aw: usize,
    ind_wa: usize,
    /// `‖A‖_2 ‖W‖_2`, the nominal norm of `AW` and `WA`.
    base: f64,
}

impl WeightedPair {
    /// Checks shapes and `W != 0`, then computes `Ind(AW)` and `Ind(WA)`.
    pub fn new(a: ComplexMatrix, w: ComplexMatrix, tol: &ToleranceModel) -> Result<Self> {
        check_shapes(&a, &w)?;
        if w.is_zero() {
            return Err(Error::Domain("the weight W must be nonzero".into()));
        }
        let base = spectral_norm(&a)? * spectral_norm(&w)?;
        let ind_aw = matrix_index_at_scale(&(&a * &w), base, tol)?.index;
        let ind_wa = matrix_index_at_scale(&(&w * &a), base, tol)?.index;
        if ind_aw.abs_diff(ind_wa) > 1 {
            return Err(Error::Numeric(format!(
                "Ind(AW) = {ind_aw} and Ind(WA) = {ind_wa} differ by more than one; \
                 the rank tolerance misclassified a power"
            )));
        }
        Ok(WeightedPair {
            a,
            w,
            ind_aw,
            ind_wa,
            base,
        })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn ind_aw(&self) -> usize {
        self.ind_aw
    }

    pub fn ind_wa(&self) -> usize {
        self.ind_wa
    }

    /// `max(Ind(AW), Ind(WA))`.
    pub fn k(&self) -> usize {
        self.ind_aw.max(self.ind_wa)
    }

    pub fn aw(&self) -> ComplexMatrix {
        &self.a * &self.w
    }

    pub fn wa(&self) -> ComplexMatrix {
        &self.w * &self.a
    }

    pub fn waw(&self) -> ComplexMatrix {
        &(&self.w * &self.a) * &self.w
    }

    /// `‖A‖_2 ‖W‖_2`.
    pub fn base(&self) -> f64 {
        self.base
    }
}

fn check_shapes(a: &ComplexMatrix, w: &ComplexMatrix) -> Result<()> {
    if a.rows() != w.cols() || a.cols() != w.rows() {
        return Err(Error::shape(
            "weighted pair",
            format!(
                "A is {}x{} so W must be {}x{}, got {}x{}",
                a.rows(),
                a.cols(),
                a.cols(),
                a.rows(),
                w.rows(),
                w.cols()
            ),
        ));
    }
    Ok(())
}

/// `(WAW P_{(AW)^q})^†` without the `W != 0` check, for trailing blocks of a
/// decomposition where a zero weight is legitimate.
///
/// `norm_a` and `norm_w` are lower bounds for the nominal norms of `A` and
/// `W`; a block cut from a larger pair passes the norms of that pair.
pub(crate) fn weighted_qbt_raw(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    q: usize,
    (norm_a, norm_w): (f64, f64),
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    check_shapes(a, w)?;
    let na = spectral_norm(a)?.max(norm_a);
    let nw = spectral_norm(w)?.max(norm_w);
    let p = power_range_projector_at_scale(&(a * w), q, na * nw, tol)?;
    let waw = &(w * a) * w;
    let scale = nw * nw * na;
    pinv_at_scale(&(&waw * &p), scale, tol)
}

/// `A^{d,W} = A [(WA)^d]^2`.
pub fn weighted_drazin(p: &WeightedPair, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    let d = drazin_with_index(&p.wa(), p.ind_wa, p.base, tol)?;
    Ok(&(&p.a * &d) * &d)
}

/// `A^{◇q,W} = (WAW P_{(AW)^q})^†`.
pub fn weighted_qbt(
    p: &WeightedPair,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    weighted_qbt_raw(&p.a, &p.w, params.q, (0.0, 0.0), tol)
}

/// `A^{⊛,W} = (WAW P_{(AW)^k})^†`.
pub fn weighted_core_ep(p: &WeightedPair, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    weighted_qbt(p, QbtParams::new(p.k()), tol)
}

/// `A^{◇,W} = (WAW P_{AW})^†`.
pub fn weighted_bt(p: &WeightedPair, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    weighted_qbt(p, QbtParams::new(1), tol)
}

/// `[W (AW)^{q+1} ((AW)^q)^†]^†` and `[(WA)^{q+1} W ((AW)^q)^†]^†`.
pub fn weighted_qbt_product_forms(
    p: &WeightedPair,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let q = params.q;
    let aw = p.aw();
    let wa = p.wa();
    let awq = aw.pow(q)?;
    let nominal = power_scale(spectral_norm(&aw)?, p.base, q);
    let awq_pinv = pinv_at_scale(&awq, nominal, tol)?;
    let outer = spectral_norm(&p.w)? * power_scale(spectral_norm(&aw)?, p.base, q + 1);
    let first = &(&p.w * &aw.pow(q + 1)?) * &awq_pinv;
    let second = &(&wa.pow(q + 1)? * &p.w) * &awq_pinv;
    Ok((
        pinv_at_scale(&first, outer, tol)?,
        pinv_at_scale(&second, outer, tol)?,
    ))
}

/// `(W [(AW)^{◇q}]^†)^†`.
pub fn weighted_qbt_via_square(
    p: &WeightedPair,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<ComplexMatrix> {
    let square = qbt_inverse_at_scale(&p.aw(), params.q, p.base, tol)?;
    let inner = pinv(&square, tol)?;
    // W [(AW)^{◇q}]^† can vanish exactly while carrying rounding residue.
    let nominal = spectral_norm(&p.w)? * spectral_norm(&inner)?;
    pinv_at_scale(&(&p.w * &inner), nominal, tol)
}

/// `(AW)^{ℓ-1} A = A (WA)^{ℓ-1}` to `residual_atol`.
pub fn cline_shift_check(p: &WeightedPair, ell: usize, tol: &ToleranceModel) -> Result<bool> {
    if ell == 0 {
        return Err(Error::Domain("ell must be at least 1".into()));
    }
    let left = &p.aw().pow(ell - 1)? * &p.a;
    let right = &p.a * &p.wa().pow(ell - 1)?;
    Ok(tol.agrees(&left, &right))
}

/// `(A^{◇q,W}, [(AW)^{◇q}]^2 A, A [(WA)^{◇q}]^2)`.
///
/// All three coincide for `q = 0` only by accident; for `1 <= q < k` they
/// generally differ.
pub fn dual_representation_gap(
    p: &WeightedPair,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let x = weighted_qbt(p, params, tol)?;
    let (l, r) = product_qbt_inverses(p, params, tol)?;
    Ok((x, &(&l * &l) * &p.a, &(&p.a * &r) * &r))
}

/// `((AW)^{◇q}, (WA)^{◇q})`, with rank decisions measured against `‖A‖ ‖W‖`.
pub fn product_qbt_inverses(
    p: &WeightedPair,
    params: QbtParams,
    tol: &ToleranceModel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Ok((
        qbt_inverse_at_scale(&p.aw(), params.q, p.base, tol)?,
        qbt_inverse_at_scale(&p.wa(), params.q, p.base, tol)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{bt_inverse, core_ep, drazin, qbt_inverse};
    use crate::exact::{self, float_of};
    use crate::fixtures::{self, Quantity};
    use crate::matrix::real;
    use crate::projectors::{proj_corange, proj_range};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> ToleranceModel {
        ToleranceModel::default()
    }

    fn small() -> WeightedPair {
        let (a, w) = fixtures::small_pair();
        WeightedPair::new(float_of(&a).unwrap(), float_of(&w).unwrap(), &tol()).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && a.relative_distance(b) <= eps
    }

    #[test]
    fn pair_validation() {
        let t = tol();
        let a = ComplexMatrix::identity(2);
        assert!(matches!(
            WeightedPair::new(a.clone(), ComplexMatrix::zeros(2, 2), &t),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            WeightedPair::new(ComplexMatrix::zeros(2, 3), ComplexMatrix::identity(2), &t),
            Err(Error::Shape { .. })
        ));
        let p = small();
        assert_eq!((p.ind_aw(), p.ind_wa(), p.k()), (3, 2, 3));
    }

    #[test]
    fn known_values_on_small_pair() {
        let p = small();
        let t = tol();
        for kv in fixtures::small_pair_values() {
            let got = match kv.quantity {
                Quantity::WeightedCoreEp => weighted_core_ep(&p, &t).unwrap(),
                Quantity::WeightedQbt(q) => weighted_qbt(&p, q.into(), &t).unwrap(),
                Quantity::LeftSquare(q) => dual_representation_gap(&p, q.into(), &t).unwrap().1,
                Quantity::RightSquare(q) => dual_representation_gap(&p, q.into(), &t).unwrap().2,
            };
            assert!(close(&got, &float_of(&kv.value).unwrap(), 1e-10), "{}", kv.id);
        }
    }

    #[test]
    fn identity_weight_reduces_to_square_inverses() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let t = tol();
        let a = &random::with_rank(&mut rng, 4, 4, 2) * &random::with_rank(&mut rng, 4, 4, 3);
        let p = WeightedPair::new(a.clone(), ComplexMatrix::identity(4), &t).unwrap();
        assert!(close(&weighted_drazin(&p, &t).unwrap(), &drazin(&a, &t).unwrap(), 1e-9));
        assert!(close(&weighted_core_ep(&p, &t).unwrap(), &core_ep(&a, &t).unwrap(), 1e-9));
        assert!(close(&weighted_bt(&p, &t).unwrap(), &bt_inverse(&a, &t).unwrap(), 1e-9));
        let via = weighted_qbt_via_square(&p, 2.into(), &t).unwrap();
        assert!(close(&via, &qbt_inverse(&a, 2.into(), &t).unwrap(), 1e-9));
        let k = p.k();
        let (x, l, r) = dual_representation_gap(&p, (k + 1).into(), &t).unwrap();
        let cep = core_ep(&a, &t).unwrap();
        assert!(close(&x, &cep, 1e-9));
        assert!(close(&r, &cep, 1e-9));
        // [A^⊛]^2 A = U [[T^-1, T^-2 S], [0, 0]] U*, which differs from A^⊛ once S != 0.
        assert!(l.relative_distance(&cep) > 1e-3);
        assert!(close(&(&l * &a), &(&cep * &a), 1e-9));
    }

    #[test]
    fn weighted_drazin_equations_on_small_pair() {
        let p = small();
        let t = tol();
        let x = weighted_drazin(&p, &t).unwrap();
        let (a, w) = fixtures::small_pair();
        let oracle = float_of(&exact::exact_weighted_drazin(&a, &w).unwrap()).unwrap();
        assert!(close(&x, &oracle, 1e-10));
        let (aw, w) = (p.aw(), p.w().clone());
        let k = p.k();
        assert!(close(&(&(&(&x * &w) * &aw) * &x), &x, 1e-10));
        assert!(close(&(&aw * &x), &(&(&x * &w) * p.a()), 1e-10));
        assert!(close(&(&(&x * &w) * &aw.pow(k + 1).unwrap()), &aw.pow(k).unwrap(), 1e-10));
        let d = drazin(&aw, &t).unwrap();
        assert!(close(&(&(&d * &d) * p.a()), &x, 1e-10));
    }

    #[test]
    fn weighted_core_ep_system() {
        let p = small();
        let t = tol();
        let x = weighted_core_ep(&p, &t).unwrap();
        let k = p.k();
        let lhs = &p.waw() * &x;
        assert!(close(&lhs, &proj_range(&p.wa().pow(k).unwrap(), &t).unwrap(), 1e-10));
        // A [(WA)^⊛]^2 = A^{⊛,W} and P_{(WA)^k} W A^{⊛,W} = (WA)^⊛.
        let wa_cep = core_ep(&p.wa(), &t).unwrap();
        assert!(close(&(&(p.a() * &wa_cep) * &wa_cep), &x, 1e-10));
        let pk = proj_range(&p.wa().pow(k).unwrap(), &t).unwrap();
        assert!(close(&(&(&pk * p.w()) * &x), &wa_cep, 1e-10));
    }

    #[test]
    fn product_forms_and_via_square_on_small_pair() {
        let p = small();
        let t = tol();
        for q in 0..6 {
            let x = weighted_qbt(&p, q.into(), &t).unwrap();
            let (f1, f2) = weighted_qbt_product_forms(&p, q.into(), &t).unwrap();
            assert!(close(&f1, &x, 1e-10), "q = {q}");
            assert!(close(&f2, &x, 1e-10), "q = {q}");
            assert!(close(&weighted_qbt_via_square(&p, q.into(), &t).unwrap(), &x, 1e-10));
        }
        let x0 = weighted_qbt(&p, 0.into(), &t).unwrap();
        assert!(close(&x0, &pinv(&p.waw(), &t).unwrap(), 1e-12));
        assert!(close(&weighted_qbt(&p, 5.into(), &t).unwrap(), &weighted_core_ep(&p, &t).unwrap(), 0.0));
    }

    #[test]
    fn defining_system_and_uniqueness() {
        let p = small();
        let t = tol();
        let (aw, wa, w) = (p.aw(), p.wa(), p.w().clone());
        for q in 0..4 {
            let x = weighted_qbt(&p, q.into(), &t).unwrap();
            assert!((&(&(&x * &w) * &aw) * &x).relative_distance(&x) < 1e-12);
            let bump = x.map(|z| z + num_complex::Complex64::new(1e-3, 0.0));
            let r = [
                (&(&(&bump * &w) * &aw) * &bump).relative_distance(&bump),
                (&bump * &wa).relative_distance(&(&x * &wa)),
                (&aw * &bump).relative_distance(&(&aw * &x)),
            ];
            assert!(r.iter().any(|&r| r > 1e-6), "q = {q}: {r:?}");
        }
    }

    #[test]
    fn cline_shift() {
        let p = small();
        let t = tol();
        for ell in 1..6 {
            assert!(cline_shift_check(&p, ell, &t).unwrap());
        }
        assert!(matches!(cline_shift_check(&p, 0, &t), Err(Error::Domain(_))));
    }

    #[test]
    fn spurious_solution_on_counter_pair() {
        let (ea, ew) = fixtures::counter_pair();
        let t = tol();
        let p = WeightedPair::new(float_of(&ea).unwrap(), float_of(&ew).unwrap(), &t).unwrap();
        assert_eq!((p.ind_aw(), p.ind_wa()), (3, 3));
        let x0 = weighted_bt(&p, &t).unwrap();
        let q = proj_corange(&p.aw(), &t).unwrap();
        let i = ComplexMatrix::identity(q.rows());
        let x = &(&q * &x0) + &(&(&i - &q) * &p.w().adjoint());
        let (aw, wa, w) = (p.aw(), p.wa(), p.w().clone());
        assert!(close(&(&(&(&x * &w) * &aw) * &x), &x, 1e-10));
        assert!(close(&(&aw * &x), &(&aw * &x0), 1e-10));
        let xwa = &x * &wa;
        let x0wa = &x0 * &wa;
        assert!((xwa[(0, 0)].re - 0.6).abs() < 1e-10);
        assert!((x0wa[(0, 0)].re - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn nilpotent_product_gives_zero() {
        let t = tol();
        let a = real(&[&[0., 1.], &[0., 0.]]);
        let p = WeightedPair::new(a, ComplexMatrix::identity(2), &t).unwrap();
        assert!(weighted_drazin(&p, &t).unwrap().is_zero());
        assert!(weighted_core_ep(&p, &t).unwrap().is_zero());
    }
}
