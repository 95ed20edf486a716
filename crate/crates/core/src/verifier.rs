//! Conformance checks: defining systems, reduction identities, range and
//! null-space characterizations, decompositions and the known fraction-valued
//! examples, gathered into a [`ConformanceReport`].
//!
//! Every check reports named residuals with their thresholds. Checks that are
//! run on many pairs (and many `q`) are folded into a single result holding
//! the worst residual seen.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{drazin_with_index, qbt_inverse_at_scale};
use crate::decomposition::{
    block_pinv, block_range_projector, canonical_qbt, canonical_qbt_products,
    canonical_weighted_qbt, core_ep_decompose_at_scale, trailing_z_gap, weighted_core_ep_decompose,
};
use crate::error::{Error, Result};
use crate::exact::{
    self, exact_pinv, exact_proj_corange, exact_proj_range, exact_qbt,
    exact_weighted_core_ep, exact_weighted_drazin, exact_weighted_index, exact_weighted_qbt,
    float_of, from_float, RationalMatrix, EXACT_SIZE_LIMIT,
};
use crate::fixtures::{self, Quantity};
use crate::matrix::{pinv_at_scale, rank_at_scale, ComplexMatrix};
use crate::projectors::{
    matrix_index_at_scale, pinv, power_range_projector_at_scale, power_scale,
    spectral_norm,
};
use crate::random::{gaussian, planted_pair};
use crate::tolerance::ToleranceModel;
use crate::weighted::{
    dual_representation_gap, product_qbt_inverses, weighted_core_ep, weighted_drazin,
    weighted_qbt, weighted_qbt_product_forms, weighted_qbt_via_square, WeightedPair,
};

/// Lower bound on the Frobenius gap asserted by expected-inequality checks.
pub const EXPECTED_GAP: f64 = 1e-3;

/// Which side of its threshold a residual must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    pub threshold: f64,
    pub bound: Bound,
}

impl Residual {
    /// NaN never holds.
    pub fn holds(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.threshold,
            Bound::AtLeast => self.value >= self.threshold,
        }
    }

    /// The less favourable of two readings of the same residual.
    fn worst(self, other: Residual) -> Residual {
        if self.value.is_nan() {
            return self;
        }
        if other.value.is_nan() {
            return other;
        }
        let take_other = match self.bound {
            Bound::AtMost => other.value > self.value,
            Bound::AtLeast => other.value < self.value,
        };
        if take_other {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub passed: bool,
    pub residuals: BTreeMap<String, Residual>,
    pub detail: String,
}

impl CheckResult {
    pub fn new(check_id: impl Into<String>) -> Self {
        CheckResult {
            check_id: check_id.into(),
            passed: true,
            residuals: BTreeMap::new(),
            detail: String::new(),
        }
    }

    fn push(mut self, name: &str, value: f64, threshold: f64, bound: Bound) -> Self {
        let r = Residual {
            value,
            threshold,
            bound,
        };
        let merged = match self.residuals.get(name) {
            Some(old) => old.worst(r),
            None => r,
        };
        self.residuals.insert(name.to_string(), merged);
        self.passed = self.residuals.values().all(Residual::holds);
        self
    }

    /// Adds a residual that must not exceed `threshold`.
    pub fn at_most(self, name: &str, value: f64, threshold: f64) -> Self {
        self.push(name, value, threshold, Bound::AtMost)
    }

    /// Adds a gap that must reach `threshold`.
    pub fn at_least(self, name: &str, value: f64, threshold: f64) -> Self {
        self.push(name, value, threshold, Bound::AtLeast)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn errored(check_id: &str, err: &Error) -> Self {
        CheckResult::new(check_id)
            .at_most("errors", 1.0, 0.0)
            .with_detail(err.to_string())
    }
}

/// Runs `f`, turning an error into a failed result for `id`.
fn guard(id: &str, f: impl FnOnce() -> Result<CheckResult>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult::errored(id, &e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub results: Vec<CheckResult>,
    /// Seed of the random corpus, `None` for the fixed examples alone.
    pub corpus_seed: Option<u64>,
    pub tolerance: ToleranceModel,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    pub fn get(&self, check_id: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.check_id == check_id)
    }

    /// Concatenates two reports; the seed of `other` wins when present.
    pub fn merge(mut self, other: ConformanceReport) -> Self {
        self.results.extend(other.results);
        self.corpus_seed = other.corpus_seed.or(self.corpus_seed);
        self
    }

    /// One line per check, then a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let seed = self.corpus_seed.map_or("none".to_string(), |s| s.to_string());
        let _ = writeln!(
            out,
            "# seed={seed} rank_rtol={:e} residual_atol={:e}",
            self.tolerance.rank_rtol, self.tolerance.residual_atol
        );
        for r in &self.results {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "{status} {}", r.check_id);
            for (name, res) in &r.residuals {
                let op = match res.bound {
                    Bound::AtMost => "<=",
                    Bound::AtLeast => ">=",
                };
                let _ = write!(out, " {name}={:.3e}({op}{:.0e})", res.value, res.threshold);
            }
            if !r.detail.is_empty() {
                let _ = write!(out, " | {}", r.detail);
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "# {} checks, {failed} failed", self.results.len());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Thresholds derived from a tolerance model.
#[derive(Debug, Clone, Copy)]
struct Thresholds {
    /// Fixed examples, block Moore-Penrose and exact-vs-float comparisons.
    exact: f64,
    /// Identities evaluated on random pairs.
    corpus: f64,
    /// Decomposition residuals.
    decomposition: f64,
}

impl Thresholds {
    fn new(tol: &ToleranceModel) -> Self {
        Thresholds {
            exact: tol.residual_atol,
            corpus: 100.0 * tol.residual_atol,
            decomposition: 10.0 * tol.residual_atol,
        }
    }
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.relative_distance(b)
}

fn gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    (a - b).frobenius_norm()
}

/// A matrix with its nominal size, the reference for its rank decisions.
struct Scaled {
    m: ComplexMatrix,
    nominal: f64,
}

impl Scaled {
    fn new(m: ComplexMatrix, nominal: f64) -> Self {
        Scaled { m, nominal }
    }

    /// Nominal size taken as the actual spectral norm, for matrices produced
    /// by a truncated pseudoinverse (no rounding residue to suppress).
    fn own(m: ComplexMatrix) -> Result<Self> {
        let nominal = spectral_norm(&m)?;
        Ok(Scaled { m, nominal })
    }

    fn unit(&self) -> ComplexMatrix {
        if self.nominal > 0.0 {
            self.m.scale_real(1.0 / self.nominal)
        } else {
            self.m.clone()
        }
    }

    fn adjoint(&self) -> Scaled {
        Scaled::new(self.m.adjoint(), self.nominal)
    }
}

/// Rank decisions on nominally normalized matrices.
struct Ranks<'a> {
    tol: &'a ToleranceModel,
}

impl Ranks<'_> {
    fn rank(&self, m: &ComplexMatrix) -> Result<usize> {
        rank_at_scale(m, 1.0, self.tol)
    }

    /// `rank([Y | X]) - rank(Y)`: zero iff `R(X) ⊆ R(Y)`.
    fn range_excess(&self, x: &Scaled, y: &Scaled) -> Result<f64> {
        let (xu, yu) = (x.unit(), y.unit());
        let joint = self.rank(&yu.hstack(&xu)?)?;
        Ok(joint.abs_diff(self.rank(&yu)?) as f64)
    }

    fn range_mismatch(&self, x: &Scaled, y: &Scaled) -> Result<f64> {
        Ok(self.range_excess(x, y)? + self.range_excess(y, x)?)
    }

    /// Zero iff `N(Y) ⊆ N(X)`.
    fn null_excess(&self, y: &Scaled, x: &Scaled) -> Result<f64> {
        self.range_excess(&x.adjoint(), &y.adjoint())
    }

    fn null_mismatch(&self, x: &Scaled, y: &Scaled) -> Result<f64> {
        self.range_mismatch(&x.adjoint(), &y.adjoint())
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// A registered check and the identity it evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Registration {
    pub check_id: &'static str,
    pub identity: &'static str,
}

const fn reg(check_id: &'static str, identity: &'static str) -> Registration {
    Registration { check_id, identity }
}

/// Checks of the defining system and the three range / null-space systems,
/// one per equation.
pub const SYSTEM_CHECKS: &[Registration] = &[
    reg("system.definition.eq1", "XWAWX = X"),
    reg("system.definition.eq2", "XWA = (WAW P_{(AW)^q})^† WA"),
    reg("system.definition.eq3", "AWX = AW (WAW P_{(AW)^q})^†"),
    reg("system.one.eq", "P_{(AW)^q} X = (WAW P_{(AW)^q})^†"),
    reg("system.one.range", "R(X) ⊆ R((AW)^q)"),
    reg("system.two.eq", "AWX = AW (WAW P_{(AW)^q})^† (range form)"),
    reg("system.two.range", "R(X) ⊆ R(P_{(AW)^q} (WAW)^*)"),
    reg("system.three.eq", "XWA = (WAW P_{(AW)^q})^† WA (null-space form)"),
    reg("system.three.null", "N(P_{(AW)^q} (WAW)^*) ⊆ N(X)"),
];

/// Identity-reduction checks.
pub const REDUCTION_CHECKS: &[Registration] = &[
    reg("reduction.q0", "A^{◇0,W} = (WAW)^†"),
    reg(
        "reduction.q1",
        "A^{◇1,W} solves XWAWX = X, XWA = [W(AW)^2(AW)^†]^† WA, AWX = AW[(WA)^2 W (AW)^†]^†",
    ),
    reg("reduction.ind_aw", "A^{◇q,W} = A^{⊛,W} for q = Ind(AW)"),
    reg("reduction.q_ge_k", "A^{◇q,W} = A^{⊛,W} for q >= k"),
    reg("reduction.k1", "A^{◇,W} = A^{⊛,W} when k = 1"),
];

/// Checks run on every pair of a corpus, in report order. Together with
/// [`SYSTEM_CHECKS`] and [`REDUCTION_CHECKS`] they form the per-pair suite.
pub const PAIR_CHECKS: &[Registration] = &[
    reg("pair.indices", "k = max(Ind(AW), Ind(WA)) with the planted indices"),
    reg("wdrazin.representations", "A^{d,W} = A[(WA)^d]^2 = [(AW)^d]^2 A"),
    reg("wcore_ep.system", "WAWX = P_{(WA)^k}, R(X) ⊆ R((AW)^k)"),
    reg(
        "wcore_ep.properties",
        "A^{⊛,W} = A[(WA)^⊛]^2, A^{⊛,W} W P_{(AW)^k} = (AW)^⊛, P_{(WA)^k} W A^{⊛,W} = (WA)^⊛",
    ),
    reg("wqbt.uniqueness", "a perturbed X fails every characterizing system"),
    reg("wqbt.product_forms", "A^{◇q,W} = [W(AW)^{q+1}((AW)^q)^†]^† = [(WA)^{q+1}W((AW)^q)^†]^†"),
    reg("wqbt.via_square", "A^{◇q,W} = (W[(AW)^{◇q}]^†)^†"),
    reg("cline_shift", "(AW)^{l-1} A = A (WA)^{l-1}"),
    reg("dual.q_ge_k", "A^{◇q,W} = A[(WA)^{◇q}]^2 for q >= k"),
    reg("properties.range", "R(A^{◇q,W}) = R(P_{(AW)^q}(WAW)^*)"),
    reg("properties.null", "N(A^{◇q,W}) = N(P_{(AW)^q}(WAW)^*)"),
    reg("properties.via_square", "R, N of A^{◇q,W} = R, N of ([(AW)^{◇q}]^†)^* W^*"),
    reg(
        "properties.product_forms",
        "R(A^{◇q,W}) = R([((AW)^q)^†]^*[(AW)^{q+1}]^*W^*), N(A^{◇q,W}) = N([(AW)^{q+1}]^*W^*)",
    ),
    reg("properties.range_subset", "R(A^{◇q,W}) ⊆ R((AW)^q)"),
    reg("properties.projector", "P_{(AW)^q} A^{◇q,W} = A^{◇q,W}"),
    reg("outer.prescribed", "A^{◇q,W} = (WAW)^{(2)} with range R(P_{(AW)^q}(WAW)^*) and null space N([(AW)^{q+1}]^*W^*)"),
    reg("outer.left_idempotent", "WAW A^{◇q,W} is the projector onto R(W[(AW)^{◇q}]^†(WAW)^*) along N([(AW)^{q+1}]^*W^*)"),
    reg("outer.right_idempotent", "A^{◇q,W} WAW is the projector onto R(P_{(AW)^q}(WAW)^*) along N([(AW)^{q+1}]^*W^*WAW)"),
    reg("decomposition.weighted", "A = U[[A1,A2],[0,A3]]V^*, W = V[[W1,W2],[0,W3]]U^*, A1, W1 nonsingular, A3W3, W3A3 nilpotent"),
    reg("decomposition.products", "AW = U[[A1W1, A1W2+A2W3],[0, A3W3]]U^* and the WA analogue"),
    reg("decomposition.core_ep", "AW = U[[T,S],[0,N]]U^*, T nonsingular, N nilpotent"),
    reg("block_pinv", "A^† from Ω = [A1A1^* + A2(I - Q_{A3})A2^*]^{-1}"),
    reg("canonical.weighted", "A^{◇q,W} from M, Z and Ω_W"),
    reg("canonical.z_identity", "P(I - Q_{W3A3W3P})P = P_{(A3W3)^q} - P_{A3^{◇q,W3}}"),
    reg("canonical.square", "A^{◇q} from Δ = (TT^* + S(P_{N^q} - P_{N^{◇q}})S^*)^{-1}"),
    reg("canonical.products", "(AW)^{◇q}, (WA)^{◇q} from the blocks of the weighted decomposition"),
    reg("exact.agreement", "float results match the rational path on integer pairs"),
];

/// Checks on the fixed fraction-valued pairs.
pub const EXAMPLE_CHECKS: &[Registration] = &[
    reg("example.small.indices", "Ind(AW) = 3, Ind(WA) = 2, k = 3"),
    reg("example.counter.indices", "Ind(AW) = Ind(WA) = 3"),
    reg("example.small.wcore_ep", "A^{⊛,W} = e11"),
    reg("example.small.wqbt.q1", "A^{◇1,W} has first column (1/6, 1/6, 1/3, 0)"),
    reg("example.small.wqbt.q2", "A^{◇2,W} has first column (1/2, 1/2, 0, 0)"),
    reg("example.small.wqbt.q3", "A^{◇3,W} = e11"),
    reg("example.small.left_square.q1", "[(AW)^{◇1}]^2 A"),
    reg("example.small.right_square.q1", "A[(WA)^{◇1}]^2"),
    reg("example.small.left_square.q2", "[(AW)^{◇2}]^2 A"),
    reg("example.small.right_square.q2", "A[(WA)^{◇2}]^2"),
    reg("example.small.left_square.q3", "[(AW)^{◇3}]^2 A"),
    reg("example.small.right_square.q3", "A[(WA)^{◇3}]^2"),
    reg("example.small.dual_gap.q1", "A^{◇1,W}, [(AW)^{◇1}]^2 A, A[(WA)^{◇1}]^2 pairwise distinct"),
    reg("example.small.dual_gap.q2", "A^{◇2,W}, [(AW)^{◇2}]^2 A, A[(WA)^{◇2}]^2 pairwise distinct"),
    reg("example.small.dual_equal.q3", "A^{◇3,W} = A[(WA)^{◇3}]^2 != [(AW)^{◇3}]^2 A"),
    reg(
        "example.counter.spurious",
        "X = Q_{AW}X0 + (I - Q_{AW})W^* solves equations 1 and 3 with XWA(1,1) = 3/5 != 1/3 = X0WA(1,1)",
    ),
];

/// Prefix of per-pair checks folded over the fixed pairs.
pub const FIXTURE_PREFIX: &str = "fixtures.";
/// Prefix of per-pair checks folded over a random corpus.
pub const CORPUS_PREFIX: &str = "corpus.";

/// Every check id of the per-pair suite, in report order.
pub fn pair_suite_ids() -> impl Iterator<Item = &'static str> {
    PAIR_CHECKS
        .iter()
        .chain(SYSTEM_CHECKS)
        .chain(REDUCTION_CHECKS)
        .map(|r| r.check_id)
}

// ---------------------------------------------------------------------------
// System and reduction checks
// ---------------------------------------------------------------------------

/// Residuals of a candidate `x` in the defining system and systems 1-3.
///
/// One result per equation, ids as in [`SYSTEM_CHECKS`].
pub fn system_residuals(
    p: &WeightedPair,
    q: usize,
    x: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Vec<CheckResult> {
    match system_residuals_inner(p, q, x, tol) {
        Ok(v) => v,
        Err(e) => SYSTEM_CHECKS
            .iter()
            .map(|r| CheckResult::errored(r.check_id, &e))
            .collect(),
    }
}

fn system_residuals_inner(
    p: &WeightedPair,
    q: usize,
    x: &ComplexMatrix,
    tol: &ToleranceModel,
) -> Result<Vec<CheckResult>> {
    let th = Thresholds::new(tol).corpus;
    let ranks = Ranks { tol };
    let x0 = weighted_qbt(p, q.into(), tol)?;
    if x.shape() != x0.shape() {
        return Err(Error::shape(
            "system_residuals",
            format!("candidate is {:?}, expected {:?}", x.shape(), x0.shape()),
        ));
    }
    let (aw, wa, w, waw) = (p.aw(), p.wa(), p.w(), p.waw());
    let (na, nw) = (spectral_norm(p.a())?, spectral_norm(w)?);
    let naw = spectral_norm(&aw)?;
    let awq = Scaled::new(aw.pow(q)?, power_scale(naw, p.base(), q));
    let proj = power_range_projector_at_scale(&aw, q, p.base(), tol)?;
    let g = Scaled::new(&proj * &waw.adjoint(), na * nw * nw);
    let xs = Scaled::own(x.clone())?;
    let xwa = x * &wa;
    let awx = &aw * x;
    let r = |id: &str, name: &str, v: f64| CheckResult::new(id).at_most(name, v, th);
    let rank = |id: &str, name: &str, v: f64| CheckResult::new(id).at_most(name, v, 0.0);
    Ok(vec![
        r("system.definition.eq1", "residual", rel(&(&(x * w) * &awx), x)),
        r("system.definition.eq2", "residual", rel(&xwa, &(&x0 * &wa))),
        r("system.definition.eq3", "residual", rel(&awx, &(&aw * &x0))),
        r("system.one.eq", "residual", rel(&(&proj * x), &x0)),
        rank("system.one.range", "rank_excess", ranks.range_excess(&xs, &awq)?),
        r("system.two.eq", "residual", rel(&awx, &(&aw * &x0))),
        rank("system.two.range", "rank_excess", ranks.range_excess(&xs, &g)?),
        r("system.three.eq", "residual", rel(&xwa, &(&x0 * &wa))),
        rank("system.three.null", "rank_excess", ranks.null_excess(&g, &xs)?),
    ])
}

/// Number of the four systems that `results` (from [`system_residuals`])
/// satisfy completely.
fn satisfied_systems(results: &[CheckResult]) -> usize {
    ["system.definition.", "system.one.", "system.two.", "system.three."]
        .iter()
        .filter(|prefix| {
            results
                .iter()
                .filter(|r| r.check_id.starts_with(*prefix))
                .all(|r| r.passed)
        })
        .count()
}

/// The four characterizing systems evaluated on `A^{◇q,W}`, computed through
/// the first product form.
pub fn run_system_checks(p: &WeightedPair, q: usize, tol: &ToleranceModel) -> Vec<CheckResult> {
    match weighted_qbt_product_forms(p, q.into(), tol) {
        Ok((x, _)) => system_residuals(p, q, &x, tol),
        Err(e) => SYSTEM_CHECKS
            .iter()
            .map(|r| CheckResult::errored(r.check_id, &e))
            .collect(),
    }
}

/// Adds `scale * max(1, ‖X‖_F)` times a random unit direction to `x` and
/// counts how many systems still hold.
fn perturbation_check(
    p: &WeightedPair,
    q: usize,
    scale: f64,
    rng: &mut impl Rng,
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let x = weighted_qbt(p, q.into(), tol)?;
    let dir = gaussian(rng, x.rows(), x.cols());
    let size = scale * x.frobenius_norm().max(1.0) / dir.frobenius_norm();
    let bumped = &x + &dir.scale_real(size);
    let results = system_residuals(p, q, &bumped, tol);
    if let Some(err) = results.iter().find(|r| r.residuals.contains_key("errors")) {
        return Ok(err.clone());
    }
    let survivors = satisfied_systems(&results);
    Ok(CheckResult::new("wqbt.uniqueness").at_most("satisfied_systems", survivors as f64, 0.0))
}

/// `q = 0`, `q = 1`, `q = Ind(AW)` and `q >= k` reductions.
pub fn run_reduction_checks(p: &WeightedPair, tol: &ToleranceModel) -> Vec<CheckResult> {
    let th = Thresholds::new(tol).corpus;
    let k = p.k();
    let wqbt = |q: usize| weighted_qbt(p, q.into(), tol);
    vec![
        guard("reduction.q0", || {
            let nominal = spectral_norm(&p.waw())?;
            let direct = pinv_at_scale(&p.waw(), nominal.max(p.base() * spectral_norm(p.w())?), tol)?;
            Ok(CheckResult::new("reduction.q0").at_most("residual", rel(&wqbt(0)?, &direct), th))
        }),
        guard("reduction.q1", || bt_system(p, &wqbt(1)?, th, tol)),
        guard("reduction.ind_aw", || {
            let cep = weighted_core_ep(p, tol)?;
            Ok(CheckResult::new("reduction.ind_aw").at_most(
                "residual",
                rel(&wqbt(p.ind_aw())?, &cep),
                th,
            ))
        }),
        guard("reduction.q_ge_k", || {
            let cep = weighted_core_ep(p, tol)?;
            let mut c = CheckResult::new("reduction.q_ge_k");
            for q in k..=k + 2 {
                c = c.at_most("residual", rel(&wqbt(q)?, &cep), th);
            }
            Ok(c)
        }),
        guard("reduction.k1", || {
            let c = CheckResult::new("reduction.k1");
            if k != 1 {
                return Ok(c);
            }
            Ok(c.at_most("residual", rel(&wqbt(1)?, &weighted_core_ep(p, tol)?), th))
        }),
    ]
}

/// The three-equation system characterizing the W-weighted BT inverse.
fn bt_system(
    p: &WeightedPair,
    x: &ComplexMatrix,
    th: f64,
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let (aw, wa, w) = (p.aw(), p.wa(), p.w());
    let base = p.base();
    let nw = spectral_norm(w)?;
    let naw = spectral_norm(&aw)?;
    let aw_pinv = pinv_at_scale(&aw, power_scale(naw, base, 1), tol)?;
    let outer = nw * power_scale(naw, base, 2) * spectral_norm(&aw_pinv)?;
    let left = pinv_at_scale(&(&(w * &aw.pow(2)?) * &aw_pinv), outer, tol)?;
    let right = pinv_at_scale(&(&(&wa.pow(2)? * w) * &aw_pinv), outer, tol)?;
    Ok(CheckResult::new("reduction.q1")
        .at_most("eq1", rel(&(&(&(x * w) * &aw) * x), x), th)
        .at_most("eq2", rel(&(x * &wa), &(&left * &wa)), th)
        .at_most("eq3", rel(&(&aw * x), &(&aw * &right)), th))
}

// ---------------------------------------------------------------------------
// Per-pair suite
// ---------------------------------------------------------------------------

/// What is known about a pair independently of the float computation.
struct PairContext {
    label: String,
    /// Planted or exactly computed `(Ind(AW), Ind(WA))`.
    indices: (usize, usize),
    /// Exact image of an integer pair.
    exact: Option<(RationalMatrix, RationalMatrix)>,
}

/// Every per-pair check for one pair, over `q = 0..=k+1`.
fn pair_suite(
    p: &WeightedPair,
    ctx: &PairContext,
    rng: &mut impl Rng,
    tol: &ToleranceModel,
) -> Vec<CheckResult> {
    let th = Thresholds::new(tol);
    let k = p.k();
    let qs = 0..=k + 1;
    let mut out = Vec::new();

    out.push(
        CheckResult::new("pair.indices")
            .at_most("ind_aw", p.ind_aw().abs_diff(ctx.indices.0) as f64, 0.0)
            .at_most("ind_wa", p.ind_wa().abs_diff(ctx.indices.1) as f64, 0.0),
    );
    out.push(guard("wdrazin.representations", || wdrazin_check(p, th.corpus, tol)));
    out.push(guard("wcore_ep.system", || wcore_ep_system(p, th.corpus, tol)));
    out.push(guard("wcore_ep.properties", || wcore_ep_properties(p, th.corpus, tol)));
    for q in qs.clone() {
        out.push(guard("wqbt.uniqueness", || perturbation_check(p, q, EXPECTED_GAP, rng, tol)));
        out.push(guard("wqbt.product_forms", || {
            let x = weighted_qbt(p, q.into(), tol)?;
            let (f1, f2) = weighted_qbt_product_forms(p, q.into(), tol)?;
            Ok(CheckResult::new("wqbt.product_forms")
                .at_most("first", rel(&f1, &x), th.corpus)
                .at_most("second", rel(&f2, &x), th.corpus)
                .at_most("between", rel(&f1, &f2), th.corpus))
        }));
        out.push(guard("wqbt.via_square", || {
            let x = weighted_qbt(p, q.into(), tol)?;
            let via = weighted_qbt_via_square(p, q.into(), tol)?;
            Ok(CheckResult::new("wqbt.via_square").at_most("residual", rel(&via, &x), th.corpus))
        }));
    }
    out.push(guard("cline_shift", || {
        let mut c = CheckResult::new("cline_shift");
        for ell in 1..=k + 2 {
            let left = &p.aw().pow(ell - 1)? * p.a();
            let right = p.a() * &p.wa().pow(ell - 1)?;
            c = c.at_most("residual", rel(&left, &right), th.corpus);
        }
        Ok(c)
    }));
    for q in k..=k + 1 {
        out.push(guard("dual.q_ge_k", || {
            let (x, _, r) = dual_representation_gap(p, q.into(), tol)?;
            Ok(CheckResult::new("dual.q_ge_k").at_most("residual", rel(&x, &r), th.corpus))
        }));
    }
    for q in qs.clone() {
        match characterization_checks(p, q, th.corpus, tol) {
            Ok(v) => out.extend(v),
            Err(e) => out.extend(
                [
                    "properties.range",
                    "properties.null",
                    "properties.via_square",
                    "properties.product_forms",
                    "properties.range_subset",
                    "properties.projector",
                    "outer.prescribed",
                    "outer.left_idempotent",
                    "outer.right_idempotent",
                ]
                .iter()
                .map(|id| CheckResult::errored(id, &e)),
            ),
        }
    }
    out.extend(decomposition_checks(p, ctx, th, tol));
    out.push(guard("exact.agreement", || exact_agreement(p, ctx, th.exact, tol)));
    for q in qs {
        out.extend(run_system_checks(p, q, tol));
    }
    out.extend(run_reduction_checks(p, tol));
    out
}

fn wdrazin_check(p: &WeightedPair, th: f64, tol: &ToleranceModel) -> Result<CheckResult> {
    let x = weighted_drazin(p, tol)?;
    let (aw, w) = (p.aw(), p.w());
    let d_aw = drazin_with_index(&aw, p.ind_aw(), p.base(), tol)?;
    let d_wa = drazin_with_index(&p.wa(), p.ind_wa(), p.base(), tol)?;
    let k = p.k();
    Ok(CheckResult::new("wdrazin.representations")
        .at_most("left_form", rel(&(&(&d_aw * &d_aw) * p.a()), &x), th)
        .at_most("xw", rel(&(&x * w), &d_aw), th)
        .at_most("wx", rel(&(w * &x), &d_wa), th)
        .at_most("outer", rel(&(&(&(&x * w) * &aw) * &x), &x), th)
        .at_most("commute", rel(&(&aw * &x), &(&(&x * w) * p.a())), th)
        .at_most("power", rel(&(&(&x * w) * &aw.pow(k + 1)?), &aw.pow(k)?), th))
}

/// `P_{(B)^k}` for `B = AW` or `WA`, measured against the pair's norms.
fn power_projector(p: &WeightedPair, b: &ComplexMatrix, j: usize, tol: &ToleranceModel) -> Result<ComplexMatrix> {
    power_range_projector_at_scale(b, j, p.base(), tol)
}

fn wcore_ep_system(p: &WeightedPair, th: f64, tol: &ToleranceModel) -> Result<CheckResult> {
    let k = p.k();
    let x = weighted_core_ep(p, tol)?;
    let aw = p.aw();
    let awk = Scaled::new(aw.pow(k)?, power_scale(spectral_norm(&aw)?, p.base(), k));
    let ranks = Ranks { tol };
    Ok(CheckResult::new("wcore_ep.system")
        .at_most(
            "equation",
            rel(&(&p.waw() * &x), &power_projector(p, &p.wa(), k, tol)?),
            th,
        )
        .at_most("rank_excess", ranks.range_excess(&Scaled::own(x)?, &awk)?, 0.0))
}

fn wcore_ep_properties(p: &WeightedPair, th: f64, tol: &ToleranceModel) -> Result<CheckResult> {
    let k = p.k();
    let x = weighted_core_ep(p, tol)?;
    let (aw_cep, wa_cep) = product_qbt_inverses(p, k.into(), tol)?;
    let p_aw = power_projector(p, &p.aw(), k, tol)?;
    let p_wa = power_projector(p, &p.wa(), k, tol)?;
    Ok(CheckResult::new("wcore_ep.properties")
        .at_most("right_square", rel(&(&(p.a() * &wa_cep) * &wa_cep), &x), th)
        .at_most("aw_core_ep", rel(&(&(&x * p.w()) * &p_aw), &aw_cep), th)
        .at_most("wa_core_ep", rel(&(&(&p_wa * p.w()) * &x), &wa_cep), th))
}

/// Range and null-space characterizations of `A^{◇q,W}` and the two
/// idempotents built from it.
fn characterization_checks(
    p: &WeightedPair,
    q: usize,
    th: f64,
    tol: &ToleranceModel,
) -> Result<Vec<CheckResult>> {
    let ranks = Ranks { tol };
    let (aw, w, waw) = (p.aw(), p.w(), p.waw());
    let (na, nw) = (spectral_norm(p.a())?, spectral_norm(w)?);
    let naw = spectral_norm(&aw)?;
    let base = p.base();
    let n_waw = na * nw * nw;
    let x = weighted_qbt(p, q.into(), tol)?;
    let xs = Scaled::own(x.clone())?;
    let nx = xs.nominal;
    let proj = power_range_projector_at_scale(&aw, q, base, tol)?;
    let awq = aw.pow(q)?;
    let awq1 = aw.pow(q + 1)?;
    let n_awq = power_scale(naw, base, q);
    let n_awq1 = power_scale(naw, base, q + 1);

    // G = P (WAW)^*, H = [(AW)^{q+1}]^* W^*.
    let g = Scaled::new(&proj * &waw.adjoint(), n_waw);
    let h = Scaled::new(&awq1.adjoint() * &w.adjoint(), n_awq1 * nw);
    // [(AW)^{◇q}]^† = AW P_{(AW)^q}.
    let sq_inv = &aw * &proj;
    let via = Scaled::new(&sq_inv.adjoint() * &w.adjoint(), base * nw);
    let awq_pinv = pinv_at_scale(&awq, n_awq, tol)?;
    let prod = Scaled::new(
        &(&awq_pinv.adjoint() * &awq1.adjoint()) * &w.adjoint(),
        spectral_norm(&awq_pinv)? * n_awq1 * nw,
    );

    let left = &waw * &x;
    let right = &x * &waw;
    let left_range = Scaled::new(&(w * &sq_inv) * &waw.adjoint(), nw * base * n_waw);
    // N(B D) depends only on N(B), so each left factor is swapped for the
    // orthogonal projector with the same null space before multiplying.
    let q_h = &pinv_at_scale(&h.m, h.nominal, tol)? * &h.m;
    let q_x = &pinv(&x, tol)? * &x;
    let h_waw = Scaled::new(&q_h * &waw, n_waw);
    let x_waw = Scaled::new(&q_x * &waw, n_waw);
    let idem_nominal = n_waw * nx;

    Ok(vec![
        CheckResult::new("properties.range")
            .at_most("rank_mismatch", ranks.range_mismatch(&xs, &g)?, 0.0),
        CheckResult::new("properties.null")
            .at_most("rank_mismatch", ranks.null_mismatch(&xs, &g)?, 0.0),
        CheckResult::new("properties.via_square")
            .at_most("range_mismatch", ranks.range_mismatch(&xs, &via)?, 0.0)
            .at_most("null_mismatch", ranks.null_mismatch(&xs, &via)?, 0.0),
        CheckResult::new("properties.product_forms")
            .at_most("range_mismatch", ranks.range_mismatch(&xs, &prod)?, 0.0)
            .at_most("null_mismatch", ranks.null_mismatch(&xs, &h)?, 0.0),
        CheckResult::new("properties.range_subset").at_most(
            "rank_excess",
            ranks.range_excess(&xs, &Scaled::new(awq, n_awq))?,
            0.0,
        ),
        CheckResult::new("properties.projector").at_most("residual", rel(&(&proj * &x), &x), th),
        CheckResult::new("outer.prescribed")
            .at_most("outer", rel(&(&(&x * &waw) * &x), &x), th)
            .at_most("range_mismatch", ranks.range_mismatch(&xs, &g)?, 0.0)
            .at_most("null_mismatch", ranks.null_mismatch(&xs, &h)?, 0.0),
        CheckResult::new("outer.left_idempotent")
            .at_most("idempotent", rel(&(&left * &left), &left), th)
            .at_most(
                "range_mismatch",
                ranks.range_mismatch(&Scaled::new(left.clone(), idem_nominal), &left_range)?,
                0.0,
            )
            .at_most(
                "null_mismatch",
                ranks.null_mismatch(&Scaled::new(left, idem_nominal), &h)?,
                0.0,
            ),
        CheckResult::new("outer.right_idempotent")
            .at_most("idempotent", rel(&(&right * &right), &right), th)
            .at_most(
                "range_mismatch",
                ranks.range_mismatch(&Scaled::new(right, idem_nominal), &g)?,
                0.0,
            )
            .at_most(
                "null_mismatch",
                ranks.null_mismatch(&x_waw, &h_waw)?,
                0.0,
            ),
    ])
}

fn decomposition_checks(
    p: &WeightedPair,
    ctx: &PairContext,
    th: Thresholds,
    tol: &ToleranceModel,
) -> Vec<CheckResult> {
    const IDS: [&str; 7] = [
        "decomposition.weighted",
        "decomposition.products",
        "block_pinv",
        "canonical.weighted",
        "canonical.z_identity",
        "canonical.square",
        "canonical.products",
    ];
    let d = match weighted_core_ep_decompose(p, tol) {
        Ok(d) => d,
        Err(e) => {
            let mut v: Vec<_> = IDS.iter().map(|id| CheckResult::errored(id, &e)).collect();
            v.push(guard("decomposition.core_ep", || square_decomposition_check(p, th, tol)));
            return v;
        }
    };
    let k = p.k();
    let mut out = Vec::new();
    out.push(guard("decomposition.weighted", || {
        let r = d.residuals;
        let mut c = CheckResult::new("decomposition.weighted")
            .at_most("unitary_u", r.unitary_u, th.decomposition)
            .at_most("unitary_v", r.unitary_v, th.decomposition)
            .at_most("reconstruct_a", r.reconstruct_a, th.decomposition)
            .at_most("reconstruct_w", r.reconstruct_w, th.decomposition)
            .at_most("nilpotent_aw", r.nilpotent_aw, th.decomposition)
            .at_most("nilpotent_wa", r.nilpotent_wa, th.decomposition);
        if d.t_dim > 0 {
            c = c
                .at_least("sigma_min_a1", r.sigma_min_a1 / d.norm_a, tol.rank_rtol)
                .at_least("sigma_min_w1", r.sigma_min_w1 / d.norm_w, tol.rank_rtol);
        }
        // Nilpotency indices measured on the trailing blocks alone.
        let base = d.norm_a * d.norm_w;
        let iaw = matrix_index_at_scale(&(&d.a3 * &d.w3), base, tol)?.index;
        let iwa = matrix_index_at_scale(&(&d.w3 * &d.a3), base, tol)?.index;
        Ok(c.at_most("ind_aw", iaw.abs_diff(ctx.indices.0) as f64, 0.0)
            .at_most("ind_wa", iwa.abs_diff(ctx.indices.1) as f64, 0.0))
    }));
    out.push(
        CheckResult::new("decomposition.products")
            .at_most("aw", rel(&d.aw_blocks().reconstruct(), &p.aw()), th.decomposition)
            .at_most("wa", rel(&d.wa_blocks().reconstruct(), &p.wa()), th.decomposition),
    );
    out.push(guard("decomposition.core_ep", || square_decomposition_check(p, th, tol)));
    out.push(guard("block_pinv", || {
        let x = block_pinv(&d.u, &d.v, &d.a1, &d.a2, &d.a3, tol)?;
        let reference = pinv(p.a(), tol)?;
        let proj = block_range_projector(&d.u, &d.a1, &d.a2, &d.a3, tol)?;
        Ok(CheckResult::new("block_pinv")
            .at_most("pinv", rel(&x, &reference), th.exact)
            .at_most("range_projector", rel(&proj, &(p.a() * &reference)), th.exact))
    }));
    for q in 0..=k + 1 {
        out.push(guard("canonical.weighted", || {
            let (x, _) = canonical_weighted_qbt(&d, q.into(), tol)?;
            let direct = weighted_qbt(p, q.into(), tol)?;
            Ok(CheckResult::new("canonical.weighted").at_most("residual", rel(&x, &direct), th.corpus))
        }));
        out.push(guard("canonical.z_identity", || {
            Ok(CheckResult::new("canonical.z_identity").at_most(
                "residual",
                trailing_z_gap(&d, q, tol)?,
                th.corpus,
            ))
        }));
        out.push(guard("canonical.square", || {
            let (x, _) = canonical_qbt(&d.aw_blocks(), q.into(), tol)?;
            let direct = qbt_inverse_at_scale(&p.aw(), q, p.base(), tol)?;
            Ok(CheckResult::new("canonical.square").at_most("residual", rel(&x, &direct), th.corpus))
        }));
        out.push(guard("canonical.products", || {
            let (caw, cwa) = canonical_qbt_products(&d, q.into(), tol)?;
            let (daw, dwa) = product_qbt_inverses(p, q.into(), tol)?;
            Ok(CheckResult::new("canonical.products")
                .at_most("aw", rel(&caw, &daw), th.corpus)
                .at_most("wa", rel(&cwa, &dwa), th.corpus))
        }));
    }
    out
}

/// Core-EP decomposition of the square product `AW`.
fn square_decomposition_check(
    p: &WeightedPair,
    th: Thresholds,
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let aw = p.aw();
    let d = core_ep_decompose_at_scale(&aw, p.base(), tol)?;
    let u = &d.u;
    let unitary = (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.cols())).frobenius_norm();
    let nil = d.nil.pow(d.index)?.frobenius_norm() / power_scale(d.norm, d.norm, d.index).max(1.0);
    Ok(CheckResult::new("decomposition.core_ep")
        .at_most("unitary", unitary, th.decomposition)
        .at_most("reconstruct", rel(&d.reconstruct(), &aw), th.decomposition)
        .at_most("nilpotent", nil, th.decomposition)
        .at_most("index", d.index.abs_diff(p.ind_aw()) as f64, 0.0))
}

fn exact_agreement(
    p: &WeightedPair,
    ctx: &PairContext,
    th: f64,
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let c = CheckResult::new("exact.agreement");
    let Some((ea, ew)) = &ctx.exact else {
        return Ok(c);
    };
    let (iaw, iwa, k) = exact_weighted_index(ea, ew)?;
    let mut c = c
        .at_most("ind_aw", iaw.abs_diff(p.ind_aw()) as f64, 0.0)
        .at_most("ind_wa", iwa.abs_diff(p.ind_wa()) as f64, 0.0);
    for q in 0..=k + 1 {
        let exact = float_of(&exact_weighted_qbt(ea, ew, q)?)?;
        c = c.at_most("wqbt", rel(&weighted_qbt(p, q.into(), tol)?, &exact), th);
    }
    let cep = float_of(&exact_weighted_core_ep(ea, ew)?)?;
    let drz = float_of(&exact_weighted_drazin(ea, ew)?)?;
    Ok(c.at_most("wcore_ep", rel(&weighted_core_ep(p, tol)?, &cep), th)
        .at_most("wdrazin", rel(&weighted_drazin(p, tol)?, &drz), th))
}

/// Folds per-instance results into one result per check id.
struct Tally {
    entries: BTreeMap<String, Entry>,
}

#[derive(Default)]
struct Entry {
    residuals: BTreeMap<String, Residual>,
    instances: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            entries: BTreeMap::new(),
        }
    }

    fn add(&mut self, r: CheckResult, label: &str) {
        let e = self.entries.entry(r.check_id.clone()).or_default();
        e.instances += 1;
        for (name, res) in r.residuals {
            let merged = match e.residuals.get(&name) {
                Some(old) => old.worst(res),
                None => res,
            };
            e.residuals.insert(name, merged);
        }
        if !r.passed {
            e.failures += 1;
            if e.first_failure.is_none() {
                let mut msg = label.to_string();
                if !r.detail.is_empty() {
                    msg = format!("{msg}: {}", r.detail);
                }
                e.first_failure = Some(msg);
            }
        }
    }

    /// One result per id of the per-pair suite, in registry order.
    fn finish(mut self, prefix: &str) -> Vec<CheckResult> {
        pair_suite_ids()
            .map(|id| {
                let e = self.entries.remove(id).unwrap_or_default();
                let mut detail = format!("{} instances, {} failed", e.instances, e.failures);
                if let Some(f) = e.first_failure {
                    let _ = write!(detail, "; first failure {f}");
                }
                CheckResult {
                    check_id: format!("{prefix}{id}"),
                    passed: e.failures == 0 && e.residuals.values().all(Residual::holds),
                    residuals: e.residuals,
                    detail,
                }
            })
            .collect()
    }
}

/// Runs the per-pair suite on each pair and folds the results.
fn run_pairs(
    pairs: Vec<(ComplexMatrix, ComplexMatrix, PairContext)>,
    rng: &mut impl Rng,
    prefix: &str,
    tol: &ToleranceModel,
) -> Vec<CheckResult> {
    let mut tally = Tally::new();
    for (a, w, ctx) in pairs {
        match WeightedPair::new(a, w, tol) {
            Ok(p) => {
                for r in pair_suite(&p, &ctx, rng, tol) {
                    tally.add(r, &ctx.label);
                }
            }
            Err(e) => {
                for id in pair_suite_ids() {
                    tally.add(CheckResult::errored(id, &e), &ctx.label);
                }
            }
        }
    }
    tally.finish(prefix)
}

// ---------------------------------------------------------------------------
// Fixed examples
// ---------------------------------------------------------------------------

fn exact_mismatch(a: &RationalMatrix, b: &RationalMatrix) -> f64 {
    if a == b {
        0.0
    } else {
        1.0
    }
}

/// `[(AW)^{◇q}]^2 A` and `A [(WA)^{◇q}]^2` on the rational path.
fn exact_dual(a: &RationalMatrix, w: &RationalMatrix, q: usize) -> Result<(RationalMatrix, RationalMatrix)> {
    let l = exact_qbt(&(a * w), q)?;
    let r = exact_qbt(&(w * a), q)?;
    Ok((&(&l * &l) * a, &(a * &r) * &r))
}

fn index_example(
    id: &str,
    a: &RationalMatrix,
    w: &RationalMatrix,
    expected: (usize, usize, usize),
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let (eaw, ewa, ek) = exact_weighted_index(a, w)?;
    let p = WeightedPair::new(float_of(a)?, float_of(w)?, tol)?;
    let diff = |x: usize, y: usize| x.abs_diff(y) as f64;
    Ok(CheckResult::new(id)
        .at_most("exact_ind_aw", diff(eaw, expected.0), 0.0)
        .at_most("exact_ind_wa", diff(ewa, expected.1), 0.0)
        .at_most("exact_k", diff(ek, expected.2), 0.0)
        .at_most("float_ind_aw", diff(p.ind_aw(), expected.0), 0.0)
        .at_most("float_ind_wa", diff(p.ind_wa(), expected.1), 0.0)
        .at_most("float_k", diff(p.k(), expected.2), 0.0))
}

fn known_value_check(
    kv: &fixtures::KnownValue,
    a: &RationalMatrix,
    w: &RationalMatrix,
    p: &WeightedPair,
    tol: &ToleranceModel,
) -> Result<CheckResult> {
    let (exact, float) = match kv.quantity {
        Quantity::WeightedCoreEp => (exact_weighted_core_ep(a, w)?, weighted_core_ep(p, tol)?),
        Quantity::WeightedQbt(q) => (exact_weighted_qbt(a, w, q)?, weighted_qbt(p, q.into(), tol)?),
        Quantity::LeftSquare(q) => (exact_dual(a, w, q)?.0, dual_representation_gap(p, q.into(), tol)?.1),
        Quantity::RightSquare(q) => (exact_dual(a, w, q)?.1, dual_representation_gap(p, q.into(), tol)?.2),
    };
    Ok(CheckResult::new(format!("example.{}", kv.id))
        .at_most("exact_mismatch", exact_mismatch(&exact, &kv.value), 0.0)
        .at_most("float_distance", rel(&float, &float_of(&kv.value)?), tol.residual_atol))
}

fn dual_example(p: &WeightedPair, q: usize, tol: &ToleranceModel) -> Result<CheckResult> {
    let (x, l, r) = dual_representation_gap(p, q.into(), tol)?;
    if q < p.k() {
        Ok(CheckResult::new(format!("example.small.dual_gap.q{q}"))
            .at_least("x_vs_left", gap(&x, &l), EXPECTED_GAP)
            .at_least("x_vs_right", gap(&x, &r), EXPECTED_GAP)
            .at_least("left_vs_right", gap(&l, &r), EXPECTED_GAP))
    } else {
        Ok(CheckResult::new(format!("example.small.dual_equal.q{q}"))
            .at_most("x_vs_right", rel(&x, &r), tol.residual_atol)
            .at_least("x_vs_left", gap(&x, &l), EXPECTED_GAP))
    }
}

/// `X = Q_{AW} X0 + (I - Q_{AW}) W^*` on the counter pair, both paths.
fn spurious_example(tol: &ToleranceModel) -> Result<CheckResult> {
    let (a, w) = fixtures::counter_pair();
    let ((n1, d1), (n2, d2)) = fixtures::counter_pair_corner_values();
    // Exact path.
    let aw = &a * &w;
    let wa = &w * &a;
    let x0 = exact_pinv(&(&(&wa * &w) * &exact_proj_range(&aw)?))?;
    let q = exact_proj_corange(&aw)?;
    let i = RationalMatrix::identity(q.rows());
    let x = &(&q * &x0) + &(&(&i - &q) * &w.adjoint());
    let xwa = &x * &wa;
    let x0wa = &x0 * &wa;
    let eq1 = exact_mismatch(&(&(&(&x * &w) * &aw) * &x), &x);
    let eq3 = exact_mismatch(&(&aw * &x), &(&aw * &x0));
    let corner_x = exact_mismatch(
        &RationalMatrix::from_fn(1, 1, |_, _| xwa[(0, 0)].clone()),
        &RationalMatrix::from_fn(1, 1, |_, _| exact::rational(n1, d1)),
    );
    let corner_x0 = exact_mismatch(
        &RationalMatrix::from_fn(1, 1, |_, _| x0wa[(0, 0)].clone()),
        &RationalMatrix::from_fn(1, 1, |_, _| exact::rational(n2, d2)),
    );
    // Float path.
    let p = WeightedPair::new(float_of(&a)?, float_of(&w)?, tol)?;
    let (faw, fwa, fw) = (p.aw(), p.wa(), p.w().clone());
    let fx0 = weighted_qbt(&p, 1.into(), tol)?;
    let fq = {
        let scale = power_scale(spectral_norm(&faw)?, p.base(), 1);
        &pinv_at_scale(&faw, scale, tol)? * &faw
    };
    let fi = ComplexMatrix::identity(fq.rows());
    let fx = &(&fq * &fx0) + &(&(&fi - &fq) * &fw.adjoint());
    let fxwa = &fx * &fwa;
    let fx0wa = &fx0 * &fwa;
    let atol = tol.residual_atol;
    let corner = |m: &ComplexMatrix, v: f64| (m[(0, 0)] - Complex64::new(v, 0.0)).norm();
    Ok(CheckResult::new("example.counter.spurious")
        .at_most("exact_eq1", eq1, 0.0)
        .at_most("exact_eq3", eq3, 0.0)
        .at_most("exact_corner_x", corner_x, 0.0)
        .at_most("exact_corner_x0", corner_x0, 0.0)
        .at_least("exact_eq2_violated", exact_mismatch(&xwa, &x0wa), 1.0)
        .at_most("float_eq1", rel(&(&(&(&fx * &fw) * &faw) * &fx), &fx), atol)
        .at_most("float_eq3", rel(&(&faw * &fx), &(&faw * &fx0)), atol)
        .at_most("float_corner_x", corner(&fxwa, n1 as f64 / d1 as f64), atol)
        .at_most("float_corner_x0", corner(&fx0wa, n2 as f64 / d2 as f64), atol)
        .at_least("float_eq2_gap", gap(&fxwa, &fx0wa), EXPECTED_GAP))
}

/// The fixed fraction-valued examples, plus the per-pair suite on the two
/// fixed pairs (ids prefixed with [`FIXTURE_PREFIX`]).
pub fn run_reference_examples(tol: &ToleranceModel) -> ConformanceReport {
    let mut results = Vec::new();
    let (sa, sw) = fixtures::small_pair();
    let (ca, cw) = fixtures::counter_pair();
    results.push(guard("example.small.indices", || {
        index_example("example.small.indices", &sa, &sw, (3, 2, 3), tol)
    }));
    results.push(guard("example.counter.indices", || {
        index_example("example.counter.indices", &ca, &cw, (3, 3, 3), tol)
    }));
    let small = (|| WeightedPair::new(float_of(&sa)?, float_of(&sw)?, tol))();
    for kv in fixtures::small_pair_values() {
        let id = format!("example.{}", kv.id);
        results.push(match &small {
            Ok(p) => guard(&id, || known_value_check(&kv, &sa, &sw, p, tol)),
            Err(e) => CheckResult::errored(&id, e),
        });
    }
    for (q, id) in [
        (1, "example.small.dual_gap.q1"),
        (2, "example.small.dual_gap.q2"),
        (3, "example.small.dual_equal.q3"),
    ] {
        results.push(match &small {
            Ok(p) => guard(id, || dual_example(p, q, tol)),
            Err(e) => CheckResult::errored(id, e),
        });
    }
    results.push(guard("example.counter.spurious", || spurious_example(tol)));

    let fixture_pairs = [("small pair", sa, sw), ("counter pair", ca, cw)]
        .into_iter()
        .filter_map(|(label, a, w)| {
            let (iaw, iwa, _) = exact_weighted_index(&a, &w).ok()?;
            Some((
                float_of(&a).ok()?,
                float_of(&w).ok()?,
                PairContext {
                    label: label.to_string(),
                    indices: (iaw, iwa),
                    exact: Some((a, w)),
                },
            ))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    results.extend(run_pairs(fixture_pairs, &mut rng, FIXTURE_PREFIX, tol));
    ConformanceReport {
        results,
        corpus_seed: None,
        tolerance: *tol,
    }
}

/// A seeded corpus of planted-index pairs with `k` cycling through 1, 2, 3
/// (capped by `max_dim - 1`); every fourth pair has integer entries and is
/// also checked against the rational path.
pub fn corpus_pairs(seed: u64, count: usize, max_dim: usize) -> Vec<crate::random::PlantedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = 3.min(max_dim - 1);
    (0..count)
        .map(|i| planted_pair(&mut rng, 1 + i % kmax, max_dim, i % 4 == 3))
        .collect()
}

/// Runs the per-pair suite over [`corpus_pairs`]; ids are prefixed with
/// [`CORPUS_PREFIX`].
pub fn run_random_corpus(
    seed: u64,
    count: usize,
    max_dim: usize,
    tol: &ToleranceModel,
) -> Result<ConformanceReport> {
    if count == 0 {
        return Err(Error::Domain("the corpus needs at least one pair".into()));
    }
    if max_dim < 2 {
        return Err(Error::Domain(format!("max_dim must be at least 2, got {max_dim}")));
    }
    let pairs = corpus_pairs(seed, count, max_dim)
        .into_iter()
        .enumerate()
        .map(|(i, pp)| {
            let exact = if pp.integer && pp.a.rows().max(pp.a.cols()) <= EXACT_SIZE_LIMIT {
                from_float(&pp.a).ok().zip(from_float(&pp.w).ok())
            } else {
                None
            };
            let ctx = PairContext {
                label: format!("pair {i}"),
                indices: (pp.ind_aw, pp.ind_wa),
                exact,
            };
            (pp.a, pp.w, ctx)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Ok(ConformanceReport {
        results: run_pairs(pairs, &mut rng, CORPUS_PREFIX, tol),
        corpus_seed: Some(seed),
        tolerance: *tol,
    })
}

/// Every check id a report of the fixed examples must contain.
pub fn reference_manifest() -> Vec<String> {
    EXAMPLE_CHECKS
        .iter()
        .map(|r| r.check_id.to_string())
        .chain(pair_suite_ids().map(|id| format!("{FIXTURE_PREFIX}{id}")))
        .collect()
}

/// Every check id a corpus report must contain.
pub fn corpus_manifest() -> Vec<String> {
    pair_suite_ids().map(|id| format!("{CORPUS_PREFIX}{id}")).collect()
}
