use geninv::classical::{core_ep, drazin, qbt_inverse};
use geninv::matrix::{rank, svd};
use geninv::projectors::{matrix_index, pinv, proj_range};
use geninv::random::{planted_pair, with_rank};
use geninv::weighted::{weighted_core_ep, weighted_qbt, WeightedPair};
use geninv::{ComplexMatrix, ToleranceModel};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn entries(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-4.0..4.0f64, -4.0..4.0f64), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        ComplexMatrix::from_vec(rows, cols, data).unwrap()
    })
}

/// A matrix of planted rank: `(matrix, rank)`.
fn ranked() -> impl Strategy<Value = (ComplexMatrix, usize)> {
    (any::<u64>(), 0usize..=6, 0usize..=6)
        .prop_flat_map(|(seed, m, n)| (Just(seed), Just(m), Just(n), 0..=m.min(n)))
        .prop_map(|(seed, m, n, r)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (with_rank(&mut rng, m, n, r), r)
        })
}

fn square_ranked() -> impl Strategy<Value = ComplexMatrix> {
    (any::<u64>(), 1usize..=6)
        .prop_flat_map(|(seed, n)| (Just(seed), Just(n), 0..=n))
        .prop_map(|(seed, n, r)| with_rank(&mut ChaCha8Rng::seed_from_u64(seed), n, n, r))
}

fn gap(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.relative_distance(y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative(
        (a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5)
            .prop_flat_map(|(m, n, p, q)| (entries(m, n), entries(n, p), entries(p, q)))
    ) {
        prop_assert!(gap(&(&(&a * &b) * &c), &(&a * &(&b * &c))) <= 1e-13);
    }

    #[test]
    fn rank_is_invariant_under_adjoint_and_gram((a, r) in ranked()) {
        let tol = ToleranceModel::default();
        prop_assert_eq!(rank(&a, &tol).unwrap(), r);
        prop_assert_eq!(rank(&a.adjoint(), &tol).unwrap(), r);
        prop_assert_eq!(rank(&(&a.adjoint() * &a), &tol).unwrap(), r);
    }

    #[test]
    fn svd_reconstructs((a, _) in ranked()) {
        let s = svd(&a).unwrap();
        let (m, n) = a.shape();
        prop_assert!(gap(&s.reconstruct(), &a) <= 1e-12);
        prop_assert!(gap(&(&s.u.adjoint() * &s.u), &ComplexMatrix::identity(m)) <= 1e-12);
        prop_assert!(gap(&(&s.v.adjoint() * &s.v), &ComplexMatrix::identity(n)) <= 1e-12);
        prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pinv_satisfies_penrose((a, _) in ranked()) {
        let tol = ToleranceModel::default();
        let x = pinv(&a, &tol).unwrap();
        let (ax, xa) = (&a * &x, &x * &a);
        prop_assert!(gap(&(&ax * &a), &a) <= TOL);
        prop_assert!(gap(&(&xa * &x), &x) <= TOL);
        prop_assert!(gap(&ax.adjoint(), &ax) <= TOL);
        prop_assert!(gap(&xa.adjoint(), &xa) <= TOL);
    }

    #[test]
    fn range_projector_is_orthogonal((a, _) in ranked()) {
        let tol = ToleranceModel::default();
        let p = proj_range(&a, &tol).unwrap();
        prop_assert!(gap(&(&p * &p), &p) <= TOL);
        prop_assert!(gap(&p.adjoint(), &p) <= TOL);
        prop_assert!(gap(&(&p * &a), &a) <= TOL);
    }

    #[test]
    fn drazin_and_core_ep_equations(a in square_ranked()) {
        let tol = ToleranceModel::default();
        let k = matrix_index(&a, &tol).unwrap().index;
        let ak = a.pow(k).unwrap();
        let d = drazin(&a, &tol).unwrap();
        prop_assert!(gap(&(&(&d * &a) * &ak), &ak) <= TOL);
        prop_assert!(gap(&(&(&d * &a) * &d), &d) <= TOL);
        prop_assert!(gap(&(&a * &d), &(&d * &a)) <= TOL);
        let c = core_ep(&a, &tol).unwrap();
        let ac = &a * &c;
        prop_assert!(gap(&(&ac * &c), &c) <= TOL);
        prop_assert!(gap(&ac.adjoint(), &ac) <= TOL);
        prop_assert!(gap(&ac, &proj_range(&ak, &tol).unwrap()) <= TOL);
    }

    #[test]
    fn qbt_beyond_the_index_is_core_ep(a in square_ranked(), extra in 0usize..3) {
        let tol = ToleranceModel::default();
        let k = matrix_index(&a, &tol).unwrap().index;
        let c = core_ep(&a, &tol).unwrap();
        prop_assert!(gap(&qbt_inverse(&a, (k + extra).into(), &tol).unwrap(), &c) <= TOL);
        prop_assert!(gap(&qbt_inverse(&a, 0.into(), &tol).unwrap(), &pinv(&a, &tol).unwrap()) <= TOL);
    }

    #[test]
    fn weighted_qbt_is_an_outer_inverse(seed in any::<u64>(), k in 1usize..4, q in 0usize..5) {
        let tol = ToleranceModel::default();
        let pp = planted_pair(&mut ChaCha8Rng::seed_from_u64(seed), k, 7, false);
        let planted_k = pp.k();
        let p = WeightedPair::new(pp.a, pp.w, &tol).unwrap();
        prop_assert_eq!(p.k(), planted_k);
        let x = weighted_qbt(&p, q.into(), &tol).unwrap();
        let waw = p.waw();
        prop_assert!(gap(&(&(&x * &waw) * &x), &x) <= TOL);
        if q >= p.k() {
            prop_assert!(gap(&x, &weighted_core_ep(&p, &tol).unwrap()) <= TOL);
        }
    }
}
