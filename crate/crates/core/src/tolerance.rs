use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Relative singular-value cutoff used when no explicit model is given.
pub const DEFAULT_RANK_RTOL: f64 = 1e-10;

/// Absolute threshold for equation residuals.
pub const DEFAULT_RESIDUAL_ATOL: f64 = 1e-10;

/// Thresholds governing every floating-point rank and equality decision.
///
/// A singular value `σ_i` counts toward the rank when
/// `σ_i > rank_rtol * σ_ref`, where `σ_ref` is the largest singular value of
/// the matrix (or, for computed powers and products, its nominal scale).
/// Matrix equalities pass when the relative Frobenius distance is at most
/// `residual_atol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceModel {
    pub rank_rtol: f64,
    pub residual_atol: f64,
}

impl Default for ToleranceModel {
    fn default() -> Self {
        ToleranceModel {
            rank_rtol: DEFAULT_RANK_RTOL,
            residual_atol: DEFAULT_RESIDUAL_ATOL,
        }
    }
}

impl ToleranceModel {
    pub fn new(rank_rtol: f64, residual_atol: f64) -> Result<Self> {
        if !(rank_rtol.is_finite() && rank_rtol >= 0.0) {
            return Err(Error::Domain(format!("rank_rtol must be a nonnegative real, got {rank_rtol}")));
        }
        if rank_rtol != 0.0 && rank_rtol < f64::EPSILON {
            return Err(Error::Domain(format!(
                "rank_rtol {rank_rtol:e} is below machine epsilon"
            )));
        }
        if !(residual_atol.is_finite() && residual_atol >= 0.0) {
            return Err(Error::Domain(format!(
                "residual_atol must be a nonnegative real, got {residual_atol}"
            )));
        }
        Ok(ToleranceModel {
            rank_rtol,
            residual_atol,
        })
    }

    /// The LAPACK-style cutoff `max(rows, cols) * eps` for a single matrix.
    ///
    /// Only suitable for matrices that are given exactly; computed powers and
    /// products carry rounding noise well above this level.
    pub fn machine(rows: usize, cols: usize) -> Self {
        ToleranceModel {
            rank_rtol: rows.max(cols).max(1) as f64 * f64::EPSILON,
            residual_atol: DEFAULT_RESIDUAL_ATOL,
        }
    }

    pub fn with_residual_atol(self, residual_atol: f64) -> Self {
        ToleranceModel {
            residual_atol,
            ..self
        }
    }

    pub fn with_rank_rtol(self, rank_rtol: f64) -> Self {
        ToleranceModel { rank_rtol, ..self }
    }

    /// Relative Frobenius distance within `residual_atol`.
    pub fn agrees(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> bool {
        a.shape() == b.shape() && a.relative_distance(b) <= self.residual_atol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_thresholds() {
        assert!(ToleranceModel::new(-1.0, 1e-10).is_err());
        assert!(ToleranceModel::new(1e-20, 1e-10).is_err());
        assert!(ToleranceModel::new(1e-10, f64::NAN).is_err());
        assert!(ToleranceModel::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn machine_cutoff_scales_with_shape() {
        let t = ToleranceModel::machine(8, 3);
        assert_eq!(t.rank_rtol, 8.0 * f64::EPSILON);
        assert_eq!(t.residual_atol, 1e-10);
    }
}
