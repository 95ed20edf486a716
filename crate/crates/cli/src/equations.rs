//! Defining equations of each inverse, evaluated as residuals.

use geninv::exact::{self, float_of, RationalMatrix};
use geninv::matrix::{Matrix, Scalar};
use geninv::projectors::power_range_projector;
use geninv::{ComplexMatrix, Result, ToleranceModel};

use crate::InverseKind;

/// Arithmetic the equations need beyond the ring operations.
pub trait Backend {
    type S: Scalar;
    /// `P_{B^q}`.
    fn power_projector(&self, b: &Matrix<Self::S>, q: usize) -> Result<Matrix<Self::S>>;
    /// Relative Frobenius distance; exactly zero when the matrices agree.
    fn dist(&self, x: &Matrix<Self::S>, y: &Matrix<Self::S>) -> f64;
}

pub struct Float<'a>(pub &'a ToleranceModel);

impl Backend for Float<'_> {
    type S = num_complex::Complex64;

    fn power_projector(&self, b: &ComplexMatrix, q: usize) -> Result<ComplexMatrix> {
        power_range_projector(b, q, self.0)
    }

    fn dist(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
        x.relative_distance(y)
    }
}

pub struct Exact;

impl Backend for Exact {
    type S = exact::RationalScalar;

    fn power_projector(&self, b: &RationalMatrix, q: usize) -> Result<RationalMatrix> {
        exact::exact_proj_range(&b.pow(q)?)
    }

    fn dist(&self, x: &RationalMatrix, y: &RationalMatrix) -> f64 {
        if x == y {
            return 0.0;
        }
        match (float_of(x), float_of(y)) {
            (Ok(fx), Ok(fy)) => fx.relative_distance(&fy).max(f64::MIN_POSITIVE),
            _ => f64::INFINITY,
        }
    }
}

/// Everything an equation may refer to.
pub struct Problem<'a, T> {
    pub a: &'a Matrix<T>,
    pub w: Option<&'a Matrix<T>>,
    pub x: &'a Matrix<T>,
    /// `q` for the q-BT kinds, the relevant index for Drazin-type kinds.
    pub power: usize,
}

/// `(name, residual)` for each defining equation of `kind`.
pub fn residuals<B: Backend>(
    kind: InverseKind,
    p: &Problem<'_, B::S>,
    b: &B,
) -> Result<Vec<(&'static str, f64)>> {
    let (a, x, k) = (p.a, p.x, p.power);
    // Unweighted kinds only: there X has the shape of A*.
    let ax = || a * x;
    let xa = || x * a;
    let mut out = Vec::new();
    let mut eq = |name: &'static str, lhs: Matrix<B::S>, rhs: &Matrix<B::S>| {
        out.push((name, b.dist(&lhs, rhs)));
    };
    match kind {
        InverseKind::Pinv => penrose(a, x, &mut eq),
        InverseKind::Drazin => {
            let (ax, xa) = (ax(), xa());
            eq("xa_power", &xa * &a.pow(k)?, &a.pow(k)?);
            eq("xax", &xa * x, x);
            eq("commute", ax, &xa);
        }
        InverseKind::Group => {
            let (ax, xa) = (ax(), xa());
            eq("axa", &ax * a, a);
            eq("xax", &xa * x, x);
            eq("commute", ax, &xa);
        }
        InverseKind::Core => {
            let ax = ax();
            eq("axa", &ax * a, a);
            eq("ax_x", &ax * x, x);
            eq("ax_hermitian", ax.adjoint(), &ax);
        }
        InverseKind::CoreEp => {
            let (ax, xa) = (ax(), xa());
            eq("xax", &xa * x, x);
            eq("ax_x", &ax * x, x);
            eq("ax_hermitian", ax.adjoint(), &ax);
            eq("xa_power", &xa * &a.pow(k)?, &a.pow(k)?);
        }
        InverseKind::Bt | InverseKind::Qbt => {
            let m = a * &b.power_projector(a, k)?;
            penrose(&m, x, &mut eq);
        }
        InverseKind::Wdrazin | InverseKind::WcoreEp | InverseKind::Wbt | InverseKind::Wqbt => {
            let w = p.w.expect("weighted kinds carry W");
            let (aw, wa) = (a * w, w * a);
            let waw = &wa * w;
            eq("xwawx", &(x * &waw) * x, x);
            match kind {
                InverseKind::Wdrazin => {
                    eq("awx_xwa", &aw * x, &(x * &wa));
                    eq("power", &(x * w) * &aw.pow(k + 1)?, &aw.pow(k)?);
                }
                InverseKind::WcoreEp => {
                    eq("waw_x", &waw * x, &b.power_projector(&wa, k)?);
                    eq("range", &b.power_projector(&aw, k)? * x, x);
                }
                _ => {
                    let m = &waw * &b.power_projector(&aw, k)?;
                    penrose(&m, x, &mut eq);
                }
            }
        }
    }
    Ok(out)
}

/// The four Penrose equations of `x` as the pseudoinverse of `m`.
fn penrose<T: Scalar>(
    m: &Matrix<T>,
    x: &Matrix<T>,
    eq: &mut impl FnMut(&'static str, Matrix<T>, &Matrix<T>),
) {
    let mx = m * x;
    let xm = x * m;
    eq("mxm", &mx * m, m);
    eq("xmx", &xm * x, x);
    eq("mx_hermitian", mx.adjoint(), &mx);
    eq("xm_hermitian", xm.adjoint(), &xm);
}
