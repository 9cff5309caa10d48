//! Sampled membership tests for normalized maps on the unit ball.
//!
//! A failing sample is a genuine counterexample; a pass is evidence only.
//! Margins are reduced with an ordered min/argmin (first index wins on ties),
//! so reports do not depend on how evaluation is scheduled.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::exec::map_ordered;
use crate::linalg::{inner, norm, Matrix};
use crate::operator::{numerical_radius, numerical_range_extrema, Operator, DEFAULT_ANGLE_GRID};
use crate::polymap::{NormBudget, PolyMap};
use crate::sample::BallSample;
use crate::{Error, Result, C64};

mod delta;

pub use delta::{compute_delta, maximize_over_pairs, DeltaBudget, DeltaEstimate};

/// Margins with `|margin| <= TAU_CRIT` are reported as boundary cases.
pub const TAU_CRIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Boundary,
}

impl Verdict {
    pub fn from_margin(margin: f64) -> Self {
        if margin.is_nan() || margin < -TAU_CRIT {
            Verdict::Fail
        } else if margin <= TAU_CRIT {
            Verdict::Boundary
        } else {
            Verdict::Pass
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Caratheodory,
    GrowthBounds,
    Spirallike,
    Starlike,
    GStarlike,
    Convex,
    QClass,
    QTilde,
    KTilde,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Caratheodory => "caratheodory",
            Criterion::GrowthBounds => "growth-bounds",
            Criterion::Spirallike => "spirallike",
            Criterion::Starlike => "starlike",
            Criterion::GStarlike => "g-starlike",
            Criterion::Convex => "convex",
            Criterion::QClass => "q-class",
            Criterion::QTilde => "qtilde",
            Criterion::KTilde => "ktilde",
        }
    }
}

/// Image region `g(U)` for g-starlikeness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GRegion {
    /// `Re q > 0`.
    HalfPlane,
    /// `|q - 1/(2α)| < 1/(2α)`, `α ∈ (0, 1)`.
    Disk { alpha: f64 },
    /// `|arg q| < απ/2`, `α ∈ (0, 1]`.
    Sector { alpha: f64 },
}

impl GRegion {
    pub fn disk(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(GRegion::Disk { alpha })
        } else {
            Err(Error::invalid("disk order must lie in (0, 1)"))
        }
    }

    pub fn sector(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(GRegion::Sector { alpha })
        } else {
            Err(Error::invalid("sector order must lie in (0, 1]"))
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GRegion::HalfPlane => "half-plane",
            GRegion::Disk { .. } => "disk",
            GRegion::Sector { .. } => "sector",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            GRegion::HalfPlane => None,
            GRegion::Disk { alpha } | GRegion::Sector { alpha } => Some(*alpha),
        }
    }

    /// Signed distance-like margin; positive inside the region.
    pub fn margin(&self, q: C64) -> f64 {
        match *self {
            GRegion::HalfPlane => q.re,
            GRegion::Disk { alpha } => {
                let c = 1.0 / (2.0 * alpha);
                c - (q - c).norm()
            }
            GRegion::Sector { alpha } => {
                if q == C64::new(0.0, 0.0) {
                    0.0
                } else {
                    alpha * PI / 2.0 - q.arg().abs()
                }
            }
        }
    }
}

/// Sample point (and tangent vector) where the worst margin occurred.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub z: Vec<C64>,
    pub v: Option<Vec<C64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub verdict: Verdict,
    pub min_margin: f64,
    pub witness: Option<Witness>,
    pub sample_count: usize,
    pub reason: Option<String>,
    /// Named auxiliary quantities (normalized margins, coefficient sums, ...).
    pub details: Vec<(&'static str, f64)>,
}

impl CriterionReport {
    fn new(criterion: Criterion, min_margin: f64, witness: Option<Witness>, sample_count: usize) -> Self {
        CriterionReport {
            criterion,
            verdict: Verdict::from_margin(min_margin),
            min_margin,
            witness,
            sample_count,
            reason: None,
            details: Vec::new(),
        }
    }

    fn rejected(criterion: Criterion, reason: String, witness: Option<Witness>, sample_count: usize) -> Self {
        CriterionReport {
            criterion,
            verdict: Verdict::Fail,
            min_margin: f64::NEG_INFINITY,
            witness,
            sample_count,
            reason: Some(reason),
            details: Vec::new(),
        }
    }

    fn with_detail(mut self, name: &'static str, value: f64) -> Self {
        self.details.push((name, value));
        self
    }

    /// Not a failure (pass or boundary).
    pub fn is_ok(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn detail(&self, name: &str) -> Option<f64> {
        self.details.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// One-line description.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {}: min margin {:.6e} over {} samples",
            self.criterion.as_str(),
            self.verdict.as_str(),
            self.min_margin,
            self.sample_count
        );
        if let Some(r) = &self.reason {
            s.push_str(" (");
            s.push_str(r);
            s.push(')');
        }
        s
    }
}

enum Point {
    Margin { margin: f64, aux: f64 },
    Singular { min_pivot: f64 },
    Skipped,
}

fn pointwise(r: Result<(f64, f64)>) -> Result<Point> {
    match r {
        Ok((margin, aux)) => Ok(Point::Margin { margin, aux }),
        Err(Error::SingularJacobian { min_pivot }) => Ok(Point::Singular { min_pivot }),
        Err(e) => Err(e),
    }
}

struct Reduced {
    margin: f64,
    aux: f64,
    arg: Option<usize>,
    count: usize,
    singular: Option<(usize, f64)>,
}

fn reduce(points: Vec<Result<Point>>) -> Result<Reduced> {
    let mut out = Reduced { margin: f64::INFINITY, aux: f64::INFINITY, arg: None, count: 0, singular: None };
    for (i, p) in points.into_iter().enumerate() {
        match p? {
            Point::Margin { margin, aux } => {
                out.count += 1;
                if margin < out.margin || (margin.is_nan() && !out.margin.is_nan()) {
                    out.margin = margin;
                    out.arg = Some(i);
                }
                out.aux = out.aux.min(aux);
            }
            Point::Singular { min_pivot } => {
                out.count += 1;
                if out.singular.is_none() {
                    out.singular = Some((i, min_pivot));
                }
            }
            Point::Skipped => {}
        }
    }
    Ok(out)
}

/// Builds the report for a point-sampled criterion.
fn point_report(
    criterion: Criterion,
    red: Reduced,
    witness_of: impl Fn(usize) -> Witness,
    aux_name: Option<&'static str>,
) -> CriterionReport {
    if let Some((i, pivot)) = red.singular {
        return CriterionReport::rejected(
            criterion,
            format!("singular Jacobian at a sample point (pivot {pivot:.3e}); map is not locally biholomorphic there"),
            Some(witness_of(i)),
            red.count,
        );
    }
    if red.arg.is_none() {
        return CriterionReport::rejected(criterion, "no usable sample points".into(), None, 0);
    }
    let mut rep = CriterionReport::new(criterion, red.margin, red.arg.map(&witness_of), red.count);
    if let Some(name) = aux_name {
        rep = rep.with_detail(name, red.aux);
    }
    rep
}

fn point_witness(s: &BallSample) -> impl Fn(usize) -> Witness + '_ {
    move |i| Witness { z: s.points[i].clone(), v: None }
}

fn normalization_reason(f: &PolyMap) -> Option<String> {
    if f.is_normalized() {
        None
    } else {
        Some(format!(
            "map is not normalized (f(0), Df(0) deviate from (0, I) by {:.3e})",
            f.normalization_defect()
        ))
    }
}

/// Exact coefficient check of `h(0) = 0`, `Dh(0) = A`, then `Re <h(z), z> >= 0`.
pub fn caratheodory_test(h: &PolyMap, a: &Operator, s: &BallSample) -> Result<CriterionReport> {
    Error::check_dim(h.dim(), a.dim())?;
    Error::check_dim(h.dim(), s.dim)?;
    if h.constant_term().iter().any(|c| *c != C64::new(0.0, 0.0)) {
        return Ok(CriterionReport::rejected(Criterion::Caratheodory, "h(0) != 0".into(), None, 0));
    }
    if h.linear_part() != *a.matrix() {
        return Ok(CriterionReport::rejected(Criterion::Caratheodory, "Dh(0) != A".into(), None, 0));
    }
    let evals = map_ordered(&s.points, |z| {
        pointwise(h.eval(z).map(|w| {
            let re = inner(&w, z).re;
            let nz = norm(z);
            (re, re / (nz * nz))
        }))
    });
    let red = reduce(evals)?;
    Ok(point_report(Criterion::Caratheodory, red, point_witness(s), Some("normalized_margin")))
}

/// Pointwise check of both sides of the real-part growth estimate and of the
/// norm estimate `||h(z)|| <= 4 ||z|| |V(A)| / (1 - ||z||)^2`.
pub fn verify_growth_bounds(h: &PolyMap, a: &Operator, s: &BallSample) -> Result<CriterionReport> {
    Error::check_dim(h.dim(), a.dim())?;
    Error::check_dim(h.dim(), s.dim)?;
    let (m, k) = numerical_range_extrema(a);
    if m < 0.0 {
        return Err(Error::precondition("growth estimates need m(A) >= 0"));
    }
    let vr = numerical_radius(a, DEFAULT_ANGLE_GRID, 1e-12)?;
    let evals = map_ordered(&s.points, |z| {
        pointwise(h.eval(z).map(|w| {
            let r = norm(z);
            let re = inner(&w, z).re;
            let lower = re - m * r * r * (1.0 - r) / (1.0 + r);
            let upper = k * r * r * (1.0 + r) / (1.0 - r) - re;
            let growth = 4.0 * r * vr / ((1.0 - r) * (1.0 - r)) - norm(&w);
            (lower.min(upper).min(growth), growth)
        }))
    });
    let red = reduce(evals)?;
    Ok(point_report(Criterion::GrowthBounds, red, point_witness(s), Some("norm_bound_slack"))
        .with_detail("m", m)
        .with_detail("k", k)
        .with_detail("numerical_radius", vr))
}

/// `h = Df^{-1} A f` and `Re <h(z), z>` over the sample.
///
/// `min_margin` is the raw minimum; `normalized_margin` in the details is the
/// minimum of `Re <h(z), z> / ||z||^2`.
pub fn spirallike_test(f: &PolyMap, a: &Operator, s: &BallSample) -> Result<CriterionReport> {
    spirallike_impl(f, a, s, Criterion::Spirallike)
}

/// Spirallike test with `A = I`.
pub fn starlike_test(f: &PolyMap, s: &BallSample) -> Result<CriterionReport> {
    spirallike_impl(f, &Operator::identity(f.dim()), s, Criterion::Starlike)
}

fn spirallike_impl(f: &PolyMap, a: &Operator, s: &BallSample, criterion: Criterion) -> Result<CriterionReport> {
    Error::check_dim(f.dim(), a.dim())?;
    Error::check_dim(f.dim(), s.dim)?;
    let (m, _) = numerical_range_extrema(a);
    if !(m > 0.0) {
        return Err(Error::precondition("spirallikeness needs m(A) > 0"));
    }
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(criterion, reason, None, 0));
    }
    let evals = map_ordered(&s.points, |z| {
        let nz = norm(z);
        if nz == 0.0 {
            return Ok(Point::Skipped);
        }
        pointwise(f.eval(z).and_then(|w| f.jacobian_solve(z, &a.apply(&w))).map(|h| {
            let re = inner(&h, z).re;
            (re, re / (nz * nz))
        }))
    });
    let red = reduce(evals)?;
    Ok(point_report(criterion, red, point_witness(s), Some("normalized_margin")).with_detail("m", m))
}

/// `q(z) = <Df(z)^{-1} f(z), z> / ||z||^2` must lie in the region.
pub fn g_starlike_test(f: &PolyMap, region: &GRegion, s: &BallSample) -> Result<CriterionReport> {
    Error::check_dim(f.dim(), s.dim)?;
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(Criterion::GStarlike, reason, None, 0));
    }
    let evals = map_ordered(&s.points, |z| {
        let nz = norm(z);
        if nz == 0.0 {
            return Ok(Point::Skipped);
        }
        pointwise(f.eval(z).and_then(|w| f.jacobian_solve(z, &w)).map(|u| {
            let q = inner(&u, z) / (nz * nz);
            (region.margin(q), q.arg().abs())
        }))
    });
    let red = reduce(evals)?;
    let mut rep = point_report(Criterion::GStarlike, red, point_witness(s), None);
    if let Some(alpha) = region.alpha() {
        rep = rep.with_detail("alpha", alpha);
    }
    Ok(rep)
}

/// `1 - Re <Df(z)^{-1} D^2 f(z)(v, v), z>` over the tangent pairs.
pub fn convexity_test(f: &PolyMap, s: &BallSample) -> Result<CriterionReport> {
    Error::check_dim(f.dim(), s.dim)?;
    if s.tangent_pairs.is_empty() {
        return Err(Error::precondition("convexity test needs tangent pairs"));
    }
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(Criterion::Convex, reason, None, 0));
    }
    let evals = map_ordered(&s.tangent_pairs, |t| {
        pointwise(
            f.second_derivative(&t.z, &t.v)
                .and_then(|d2| f.jacobian_solve(&t.z, &d2))
                .map(|u| (1.0 - inner(&u, &t.z).re, 0.0)),
        )
    });
    let red = reduce(evals)?;
    let witness = |i: usize| Witness { z: s.tangent_pairs[i].z.clone(), v: Some(s.tangent_pairs[i].v.clone()) };
    Ok(point_report(Criterion::Convex, red, witness, None))
}

/// `1 - ||Df(z) - I||` with the spectral norm.
pub fn q_class_test(f: &PolyMap, s: &BallSample) -> Result<CriterionReport> {
    Error::check_dim(f.dim(), s.dim)?;
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(Criterion::QClass, reason, None, 0));
    }
    let id = Matrix::identity(f.dim());
    let evals = map_ordered(&s.points, |z| pointwise(f.jacobian(z).map(|j| (1.0 - j.sub(&id).norm_spectral(), 0.0))));
    let red = reduce(evals)?;
    Ok(point_report(Criterion::QClass, red, point_witness(s), None))
}

/// `1 - sum k ||A_k||`.
pub fn qtilde_test(f: &PolyMap, budget: &NormBudget) -> Result<CriterionReport> {
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(Criterion::QTilde, reason, None, 0));
    }
    let exp = f.homogeneous_parts(budget)?;
    let (s1, s2) = exp.functionals();
    Ok(CriterionReport::new(Criterion::QTilde, 1.0 - s1, None, budget.samples)
        .with_detail("sum_k", s1)
        .with_detail("sum_k2", s2)
        .with_detail("refinement_delta", exp.max_refinement_delta()))
}

/// `1 - sum k^2 ||A_k||`; members also satisfy `sum k ||A_k|| <= 1/2`, which
/// is asserted.
pub fn ktilde_test(f: &PolyMap, budget: &NormBudget) -> Result<CriterionReport> {
    if let Some(reason) = normalization_reason(f) {
        return Ok(CriterionReport::rejected(Criterion::KTilde, reason, None, 0));
    }
    let exp = f.homogeneous_parts(budget)?;
    let (s1, s2) = exp.functionals();
    let rep = CriterionReport::new(Criterion::KTilde, 1.0 - s2, None, budget.samples)
        .with_detail("sum_k", s1)
        .with_detail("sum_k2", s2)
        .with_detail("refinement_delta", exp.max_refinement_delta());
    if rep.is_ok() && s1 > 0.5 + TAU_CRIT {
        return Err(Error::InvariantViolated(format!("sum k ||A_k|| = {s1} exceeds 1/2 for a K~ member")));
    }
    Ok(rep)
}

/// A criterion together with its parameters, for generic drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum CriterionSpec {
    Spirallike(Operator),
    Starlike,
    GStarlike(GRegion),
    Convex,
    QClass,
    QTilde,
    KTilde,
}

impl CriterionSpec {
    pub fn criterion(&self) -> Criterion {
        match self {
            CriterionSpec::Spirallike(_) => Criterion::Spirallike,
            CriterionSpec::Starlike => Criterion::Starlike,
            CriterionSpec::GStarlike(_) => Criterion::GStarlike,
            CriterionSpec::Convex => Criterion::Convex,
            CriterionSpec::QClass => Criterion::QClass,
            CriterionSpec::QTilde => Criterion::QTilde,
            CriterionSpec::KTilde => Criterion::KTilde,
        }
    }

    /// Whether the test uses the ball sample (the coefficient tests do not).
    pub fn is_sampled(&self) -> bool {
        !matches!(self, CriterionSpec::QTilde | CriterionSpec::KTilde)
    }

    pub fn evaluate(&self, f: &PolyMap, s: &BallSample, budget: &NormBudget) -> Result<CriterionReport> {
        match self {
            CriterionSpec::Spirallike(a) => spirallike_test(f, a, s),
            CriterionSpec::Starlike => starlike_test(f, s),
            CriterionSpec::GStarlike(g) => g_starlike_test(f, g, s),
            CriterionSpec::Convex => convexity_test(f, s),
            CriterionSpec::QClass => q_class_test(f, s),
            CriterionSpec::QTilde => qtilde_test(f, budget),
            CriterionSpec::KTilde => ktilde_test(f, budget),
        }
    }
}
