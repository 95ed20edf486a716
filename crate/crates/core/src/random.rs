//! Seeded random matrices with planted structure.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::{qr_column_pivoted, ComplexMatrix};

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn gaussian_real(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0))
}

/// Haar-ish unitary from the QR factor of a complex Gaussian matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    qr_column_pivoted(&gaussian(rng, n, n)).q
}

/// `U diag(σ) V*` with singular values drawn from `[lo, hi]`.
pub fn with_spectrum(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> ComplexMatrix {
    let u = unitary(rng, n);
    let v = unitary(rng, n);
    let d = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(rng.random_range(lo..=hi), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &(&u * &d) * &v.adjoint()
}

/// `m x n` complex matrix of rank exactly `r` (well conditioned on its range).
pub fn with_rank(rng: &mut impl Rng, rows: usize, cols: usize, r: usize) -> ComplexMatrix {
    assert!(r <= rows.min(cols));
    let left = unitary(rng, rows).block(0, 0, rows, r);
    let right = unitary(rng, cols).block(0, 0, cols, r);
    let core = with_spectrum(rng, r, 0.5, 2.0);
    &(&left * &core) * &right.adjoint()
}

/// Integer matrix with entries in `-bound..=bound`.
pub fn integer_matrix(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-bound..=bound) as f64, 0.0)
    })
}

/// Unimodular integer matrix (determinant ±1) and its integer inverse.
pub fn unimodular(rng: &mut impl Rng, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    unimodular_with_steps(rng, n, 2 * n)
}

/// Product of `steps` random elementary shears; fewer steps keep the
/// condition number small.
pub fn unimodular_with_steps(
    rng: &mut impl Rng,
    n: usize,
    steps: usize,
) -> (ComplexMatrix, ComplexMatrix) {
    let mut m = ComplexMatrix::identity(n);
    let mut inv = ComplexMatrix::identity(n);
    if n < 2 {
        return (m, inv);
    }
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        // m <- m E with E = I + c e_i e_j^T (adds c * col i to col j);
        // inv <- E^{-1} inv (subtracts c * row j from row i).
        for r in 0..n {
            let add = m[(r, i)] * c;
            m[(r, j)] += add;
        }
        for col in 0..n {
            let sub = inv[(j, col)] * c;
            inv[(i, col)] -= sub;
        }
    }
    (m, inv)
}

/// Signed permutation followed by a few shears: an integer change of basis
/// with integer inverse and a modest condition number.
fn integer_frame(rng: &mut impl Rng, n: usize, steps: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let signs: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    // P e_j = s_j e_{perm[j]}, P^{-1} = P^T.
    let p = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if perm[j] == i { signs[j] } else { 0.0 }, 0.0)
    });
    let (s, s_inv) = unimodular_with_steps(rng, n, steps);
    (&p * &s, &s_inv * &p.transpose())
}

/// Shape of one nilpotent block pair `(A3_i, W3_i)` in a planted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NilBlock {
    /// `A3_i = I_j`, `W3_i = lower shift S_j`: indices `(j, j)`.
    Square(usize),
    /// `A3_i = [I_j | 0]` (j x j+1), `W3_i = [0; I_j]`: indices `(j, j + 1)`.
    Wide(usize),
    /// `A3_i = [0; I_j]` (j+1 x j), `W3_i = [I_j | 0]`: indices `(j + 1, j)`.
    Tall(usize),
}

impl NilBlock {
    /// `(rows of A3_i, cols of A3_i)`.
    pub fn shape(self) -> (usize, usize) {
        match self {
            NilBlock::Square(j) => (j, j),
            NilBlock::Wide(j) => (j, j + 1),
            NilBlock::Tall(j) => (j + 1, j),
        }
    }

    /// `(Ind(A3_i W3_i), Ind(W3_i A3_i))`.
    pub fn indices(self) -> (usize, usize) {
        let ind = |d: usize| if d == 0 { 0 } else { d };
        match self {
            NilBlock::Square(j) => (ind(j), ind(j)),
            NilBlock::Wide(j) => (ind(j), j + 1),
            NilBlock::Tall(j) => (j + 1, ind(j)),
        }
    }

    fn matrices(self) -> (ComplexMatrix, ComplexMatrix) {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let pick = |c: bool| if c { one } else { zero };
        match self {
            NilBlock::Square(j) => (
                ComplexMatrix::identity(j),
                ComplexMatrix::from_fn(j, j, |r, c| pick(r == c + 1)),
            ),
            NilBlock::Wide(j) => (
                ComplexMatrix::from_fn(j, j + 1, |r, c| pick(r == c)),
                ComplexMatrix::from_fn(j + 1, j, |r, c| pick(r == c + 1)),
            ),
            NilBlock::Tall(j) => (
                ComplexMatrix::from_fn(j + 1, j, |r, c| pick(r == c + 1)),
                ComplexMatrix::from_fn(j, j + 1, |r, c| pick(r == c)),
            ),
        }
    }
}

/// A pair `A = U [[A1, A2], [0, A3]] V^{-1}`, `W = V [[W1, W2], [0, W3]] U^{-1}`
/// with nonsingular `A1`, `W1` and nilpotent `A3 W3`, `W3 A3` of known index.
#[derive(Debug, Clone)]
pub struct PlantedPair {
    pub a: ComplexMatrix,
    pub w: ComplexMatrix,
    pub ind_aw: usize,
    pub ind_wa: usize,
    /// Size of the nonsingular core, `rank((AW)^k)`.
    pub t: usize,
    /// Entries are integers (`U`, `V` unimodular rather than unitary).
    pub integer: bool,
}

impl PlantedPair {
    pub fn k(&self) -> usize {
        self.ind_aw.max(self.ind_wa)
    }
}

/// Assembles a planted pair from a core size and a list of nilpotent blocks.
pub fn planted_pair_from(
    rng: &mut impl Rng,
    t: usize,
    blocks: &[NilBlock],
    integer: bool,
) -> PlantedPair {
    let mut a3 = ComplexMatrix::zeros(0, 0);
    let mut w3 = ComplexMatrix::zeros(0, 0);
    let (mut ind_aw, mut ind_wa) = (0, 0);
    for b in blocks {
        let (ab, wb) = b.matrices();
        a3 = a3.block_diag(&ab);
        w3 = w3.block_diag(&wb);
        let (iaw, iwa) = b.indices();
        ind_aw = ind_aw.max(iaw);
        ind_wa = ind_wa.max(iwa);
    }
    let (m3, n3) = a3.shape();
    let (m, n) = (t + m3, t + n3);
    // A zero-sized product still has index 0; a nonempty nilpotent one has index >= 1.
    if m3 > 0 {
        ind_aw = ind_aw.max(1);
    }
    if n3 > 0 {
        ind_wa = ind_wa.max(1);
    }
    let (a, w) = if integer {
        let a1 = integer_frame(rng, t, 1).0;
        let w1 = integer_frame(rng, t, 1).0;
        let a2 = integer_matrix(rng, t, n3, 1);
        let w2 = integer_matrix(rng, t, m3, 1);
        let ab = ComplexMatrix::from_blocks(&a1, &a2, &ComplexMatrix::zeros(m3, t), &a3).unwrap();
        let wb = ComplexMatrix::from_blocks(&w1, &w2, &ComplexMatrix::zeros(n3, t), &w3).unwrap();
        let (u, u_inv) = integer_frame(rng, m, 1);
        let (v, v_inv) = integer_frame(rng, n, 1);
        (&(&u * &ab) * &v_inv, &(&v * &wb) * &u_inv)
    } else {
        let a1 = with_spectrum(rng, t, 0.5, 2.0);
        let w1 = with_spectrum(rng, t, 0.5, 2.0);
        let a2 = gaussian(rng, t, n3);
        let w2 = gaussian(rng, t, m3);
        // Scramble the nilpotent part without changing its structure.
        let (p, q) = (unitary(rng, m3), unitary(rng, n3));
        let a3 = &(&p * &a3) * &q.adjoint();
        let w3 = &(&q * &w3) * &p.adjoint();
        let ab = ComplexMatrix::from_blocks(&a1, &a2, &ComplexMatrix::zeros(m3, t), &a3).unwrap();
        let wb = ComplexMatrix::from_blocks(&w1, &w2, &ComplexMatrix::zeros(n3, t), &w3).unwrap();
        let (u, v) = (unitary(rng, m), unitary(rng, n));
        (&(&u * &ab) * &v.adjoint(), &(&v * &wb) * &u.adjoint())
    };
    PlantedPair {
        a,
        w,
        ind_aw,
        ind_wa,
        t,
        integer,
    }
}

/// Random planted pair with `max(Ind(AW), Ind(WA)) = k` and both dimensions
/// at most `max_dim`. Requires `max_dim >= k + 1`.
pub fn planted_pair(rng: &mut impl Rng, k: usize, max_dim: usize, integer: bool) -> PlantedPair {
    assert!(k >= 1 && max_dim > k, "need 1 <= k < max_dim");
    loop {
        let lead = match rng.random_range(0..3) {
            0 => NilBlock::Square(k),
            1 => NilBlock::Wide(k - 1),
            _ => NilBlock::Tall(k - 1),
        };
        let mut blocks = vec![lead];
        let (mut m3, mut n3) = lead.shape();
        for _ in 0..rng.random_range(0..3) {
            let j = rng.random_range(0..k);
            let b = match rng.random_range(0..3) {
                0 => NilBlock::Square(j.max(1)),
                1 => NilBlock::Wide(j),
                _ => NilBlock::Tall(j),
            };
            let (bm, bn) = b.shape();
            if m3 + bm < max_dim && n3 + bn < max_dim {
                blocks.push(b);
                m3 += bm;
                n3 += bn;
            }
        }
        let room = max_dim - m3.max(n3);
        let t = rng.random_range(0..=room.min(3));
        let pair = planted_pair_from(rng, t, &blocks, integer);
        if !pair.w.is_zero() && pair.k() == k {
            return pair;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rank;
    use crate::weighted::WeightedPair;
    use crate::tolerance::ToleranceModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn planted_rank_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = ToleranceModel::default();
        for r in 0..=3 {
            assert_eq!(rank(&with_rank(&mut rng, 5, 4, r), &tol).unwrap(), r);
        }
    }

    #[test]
    fn planted_indices_are_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tol = ToleranceModel::default();
        for i in 0..60 {
            let k = 1 + i % 3;
            let p = planted_pair(&mut rng, k, 8, i % 4 == 0);
            assert!(p.a.rows() <= 8 && p.a.cols() <= 8);
            assert_eq!(p.k(), k);
            let pair = WeightedPair::new(p.a.clone(), p.w.clone(), &tol).unwrap();
            assert_eq!((pair.ind_aw(), pair.ind_wa()), (p.ind_aw, p.ind_wa), "{p:?}");
            if p.integer {
                assert!(p.a.as_slice().iter().all(|z| z.re.fract() == 0.0 && z.im == 0.0));
            }
        }
    }

    #[test]
    fn block_shapes_and_indices() {
        assert_eq!(NilBlock::Wide(2).shape(), (2, 3));
        assert_eq!(NilBlock::Wide(2).indices(), (2, 3));
        assert_eq!(NilBlock::Tall(2).indices(), (3, 2));
        assert_eq!(NilBlock::Square(1).indices(), (1, 1));
        assert_eq!(NilBlock::Wide(0).indices(), (0, 1));
    }

    #[test]
    fn unimodular_inverse_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, inv) = unimodular(&mut rng, 5);
        assert_eq!(&m * &inv, ComplexMatrix::identity(5));
    }
}
