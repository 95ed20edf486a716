//! Small integer pairs with known fraction-valued inverses.
//!
//! `small_pair` is a 4x3 / 3x4 pair with `Ind(AW) = 3`, `Ind(WA) = 2`.
//! `counter_pair` is a 5x4 / 4x5 pair with `Ind(AW) = Ind(WA) = 3` on which
//! the first and third weighted q-BT equations admit a spurious solution.

use crate::exact::{from_integers, rational, RationalMatrix};

pub fn small_pair() -> (RationalMatrix, RationalMatrix) {
    (
        from_integers(4, 3, &[1, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0]),
        from_integers(3, 4, &[1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
    )
}

pub fn counter_pair() -> (RationalMatrix, RationalMatrix) {
    (
        from_integers(5, 4, &[1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 0]),
        from_integers(4, 5, &[1, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1]),
    )
}

/// 4x3 matrix with the given `(num, den)` entries, row-major.
fn frac4x3(entries: [(i64, i64); 12]) -> RationalMatrix {
    RationalMatrix::from_fn(4, 3, |i, j| {
        let (n, d) = entries[3 * i + j];
        rational(n, d)
    })
}

const Z: (i64, i64) = (0, 1);
const ONE: (i64, i64) = (1, 1);

fn e11() -> RationalMatrix {
    frac4x3([ONE, Z, Z, Z, Z, Z, Z, Z, Z, Z, Z, Z])
}

/// Which matrix a [`KnownValue`] records for `small_pair`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `A^{⊛,W}`.
    WeightedCoreEp,
    /// `A^{◇q,W}`.
    WeightedQbt(usize),
    /// `[(AW)^{◇q}]^2 A`.
    LeftSquare(usize),
    /// `A [(WA)^{◇q}]^2`.
    RightSquare(usize),
}

#[derive(Debug, Clone)]
pub struct KnownValue {
    pub id: &'static str,
    pub quantity: Quantity,
    pub value: RationalMatrix,
}

/// Exact values of the weighted inverses of `small_pair`.
pub fn small_pair_values() -> Vec<KnownValue> {
    use Quantity::*;
    let v = |id, quantity, value| KnownValue { id, quantity, value };
    vec![
        v("small.wcore_ep", WeightedCoreEp, e11()),
        v(
            "small.wqbt.q1",
            WeightedQbt(1),
            frac4x3([(1, 6), Z, Z, (1, 6), Z, Z, (1, 3), Z, Z, Z, Z, Z]),
        ),
        v(
            "small.wqbt.q2",
            WeightedQbt(2),
            frac4x3([(1, 2), Z, Z, (1, 2), Z, Z, Z, Z, Z, Z, Z, Z]),
        ),
        v("small.wqbt.q3", WeightedQbt(3), e11()),
        v(
            "small.left_square.q1",
            LeftSquare(1),
            frac4x3([Z, Z, Z, Z, Z, Z, (1, 2), Z, Z, Z, Z, Z]),
        ),
        v(
            "small.right_square.q1",
            RightSquare(1),
            frac4x3([(3, 25), Z, Z, (2, 25), Z, Z, Z, Z, Z, Z, Z, Z]),
        ),
        v(
            "small.left_square.q2",
            LeftSquare(2),
            frac4x3([(1, 4), (1, 4), Z, (1, 4), (1, 4), Z, Z, Z, Z, Z, Z, Z]),
        ),
        v("small.right_square.q2", RightSquare(2), e11()),
        v(
            "small.left_square.q3",
            LeftSquare(3),
            frac4x3([ONE, ONE, Z, Z, Z, Z, Z, Z, Z, Z, Z, Z]),
        ),
        v("small.right_square.q3", RightSquare(3), e11()),
    ]
}

/// `(1,1)` entries of `XWA` and `X0WA` for the spurious solution on `counter_pair`.
pub fn counter_pair_corner_values() -> ((i64, i64), (i64, i64)) {
    ((3, 5), (1, 3))
}
