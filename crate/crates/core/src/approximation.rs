//! Dilation-based approximation: pick candidates `ψ_k` so that the dilations
//! `φ_m = (1/r_m) ψ_{k_m}(r_m ·)` stay in a class while converging to the
//! target.
//!
//! Every selector re-verifies the dilated candidate with the criterion itself;
//! the closeness conditions are only used to screen candidates.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::automorphism::AutomorphismWord;
use crate::criteria::{
    compute_delta, convexity_test, maximize_over_pairs, q_class_test, qtilde_test, CriterionReport, CriterionSpec,
    DeltaBudget,
};
use crate::linalg::{distance, norm, scale_real, Matrix};
use crate::operator::Operator;
use crate::polymap::{sup_norm_on_sphere, NormBudget, PolyMap};
use crate::sample::BallSample;
use crate::{Error, Result};

pub const DEFAULT_TEST_RADII: [f64; 4] = [0.25, 0.5, 0.75, 0.9];

/// Increasing radii in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSchedule {
    radii: Vec<f64>,
}

impl DilationSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::invalid("schedule is empty"));
        }
        if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::invalid("schedule radii must lie in (0, 1)"));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("schedule radii must be strictly increasing"));
        }
        Ok(DilationSchedule { radii })
    }

    /// `r_m = 1 - 2^{-m}`, `m = 1..=count`.
    pub fn geometric(count: usize) -> Self {
        let radii = (1..=count).map(|m| 1.0 - libm::ldexp(1.0, -(m as i32))).collect();
        DilationSchedule { radii }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

impl Default for DilationSchedule {
    fn default() -> Self {
        Self::geometric(10)
    }
}

/// `sum_{k >= 2} k x^k = x^2 (2 - x) / (1 - x)^2` for `0 <= x < 1`.
pub fn series_sum(x: f64) -> f64 {
    x * x * (2.0 - x) / ((1.0 - x) * (1.0 - x))
}

/// `sum_{k = 2}^{terms + 1} k x^k`.
pub fn partial_series(x: f64, terms: usize) -> f64 {
    let mut acc = 0.0;
    let mut p = x;
    for k in 2..terms + 2 {
        p *= x;
        acc += k as f64 * p;
    }
    acc
}

/// Uniform-distance budget `ε(r) = r (1 - r) / (2 Σ)`, with `Σ` the series at
/// `x = 2r / (1 + r)`; it makes `(ε / r) Σ = (1 - r) / 2`.
pub fn epsilon_qtilde(r: f64) -> f64 {
    let x = 2.0 * r / (1.0 + r);
    r * (1.0 - r) / (2.0 * series_sum(x))
}

/// Budgets shared by the selectors.
#[derive(Debug, Clone)]
pub struct SelectionConfig {
    pub sample: BallSample,
    pub norm_budget: NormBudget,
    pub delta_budget: DeltaBudget,
}

impl SelectionConfig {
    pub fn new(sample: BallSample) -> Self {
        SelectionConfig { sample, norm_budget: NormBudget::default(), delta_budget: DeltaBudget::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    /// Criterion margin of the dilated candidate.
    pub margin: f64,
    /// Screening quantity (distance, discrepancy or derivative bound).
    pub screen: f64,
    /// Threshold the screening quantity was compared with.
    pub threshold: f64,
    pub report: CriterionReport,
}

fn usable(c: &PolyMap, dim: usize) -> bool {
    c.dim() == dim && c.is_normalized()
}

/// Smallest `k >= from` whose dilation passes `spec` directly.
pub fn select_by_criterion(
    f: &PolyMap,
    candidates: &[PolyMap],
    spec: &CriterionSpec,
    r: f64,
    from: usize,
    cfg: &SelectionConfig,
) -> Result<Selection> {
    for (k, c) in candidates.iter().enumerate().skip(from) {
        if !usable(c, f.dim()) {
            continue;
        }
        let phi = c.dilate(r)?;
        let rep = spec.evaluate(&phi, &cfg.sample, &cfg.norm_budget)?;
        if rep.is_ok() {
            return Ok(Selection { index: k, margin: rep.min_margin, screen: 0.0, threshold: 0.0, report: rep });
        }
    }
    Err(Error::NoAdmissibleIndex)
}

/// Spirallike selection with respect to `A`.
pub fn select_spirallike(
    f: &PolyMap,
    candidates: &[PolyMap],
    a: &Operator,
    r: f64,
    from: usize,
    cfg: &SelectionConfig,
) -> Result<Selection> {
    select_by_criterion(f, candidates, &CriterionSpec::Spirallike(a.clone()), r, from, cfg)
}

/// `Dψ^{-1} D²ψ(v, v)`, or `None` at a singular Jacobian.
fn second_order_term(g: &PolyMap, z: &[crate::C64], v: &[crate::C64]) -> Option<Vec<crate::C64>> {
    let d2 = g.second_derivative(z, v).ok()?;
    g.jacobian_solve(z, &d2).ok()
}

/// Convex selection: admit `k` when
/// `max ||Dψ_k^{-1} D²ψ_k(v,v) - Df^{-1} D²f(v,v)|| < 1 - δ(r)` over
/// `||z|| <= r`, `||v|| = 1`, and the dilation passes the convexity test.
pub fn select_convex(f: &PolyMap, candidates: &[PolyMap], r: f64, from: usize, cfg: &SelectionConfig) -> Result<Selection> {
    let delta = compute_delta(f, r, &cfg.delta_budget)?.value;
    if delta >= 1.0 {
        return Err(Error::precondition(format!("target fails the convexity inequality at radius {r} (delta = {delta})")));
    }
    let threshold = 1.0 - delta;
    for (k, c) in candidates.iter().enumerate().skip(from) {
        if !usable(c, f.dim()) {
            continue;
        }
        let disc = if c == f {
            0.0
        } else {
            maximize_over_pairs(f.dim(), r, false, &cfg.delta_budget, |z, v| {
                let a = second_order_term(c, z, v)?;
                let b = second_order_term(f, z, v)?;
                Some(distance(&a, &b))
            })
            .value
        };
        if !(disc < threshold) {
            continue;
        }
        let phi = c.dilate(r)?;
        let rep = convexity_test(&phi, &cfg.sample)?;
        if rep.is_ok() {
            return Ok(Selection { index: k, margin: rep.min_margin, screen: disc, threshold, report: rep });
        }
    }
    Err(Error::NoAdmissibleIndex)
}

/// `Q` selection: admit `k` when `max ||Dψ_k(rz) - I|| <= (1 + r)/2` over the
/// sample and the dilation passes the `Q` test.
pub fn select_q(f: &PolyMap, candidates: &[PolyMap], r: f64, from: usize, cfg: &SelectionConfig) -> Result<Selection> {
    let threshold = (1.0 + r) / 2.0;
    let id = Matrix::identity(f.dim());
    for (k, c) in candidates.iter().enumerate().skip(from) {
        if !usable(c, f.dim()) {
            continue;
        }
        let mut bound: f64 = 0.0;
        for z in &cfg.sample.points {
            let j = c.jacobian(&scale_real(z, r))?;
            bound = bound.max(j.sub(&id).norm_spectral());
        }
        if bound > threshold {
            continue;
        }
        let phi = c.dilate(r)?;
        let rep = q_class_test(&phi, &cfg.sample)?;
        if rep.is_ok() {
            return Ok(Selection { index: k, margin: rep.min_margin, screen: bound, threshold, report: rep });
        }
    }
    Err(Error::NoAdmissibleIndex)
}

/// `Q~` selection: admit `k` when `sup_{||z|| <= (1+r)/2} ||ψ_k - f|| <= ε(r)`
/// and the dilation passes the `Q~` test.
pub fn select_qtilde(f: &PolyMap, candidates: &[PolyMap], r: f64, from: usize, cfg: &SelectionConfig) -> Result<Selection> {
    let eps = epsilon_qtilde(r);
    for (k, c) in candidates.iter().enumerate().skip(from) {
        if !usable(c, f.dim()) {
            continue;
        }
        let diff = c.sub(f)?;
        let dist = sup_norm_on_sphere(&diff, (1.0 + r) / 2.0, &cfg.norm_budget).value;
        if dist > eps {
            continue;
        }
        let phi = c.dilate(r)?;
        let rep = qtilde_test(&phi, &cfg.norm_budget)?;
        if rep.is_ok() {
            return Ok(Selection { index: k, margin: rep.min_margin, screen: dist, threshold: eps, report: rep });
        }
    }
    Err(Error::NoAdmissibleIndex)
}

/// Selector matching the criterion.
pub fn select(
    f: &PolyMap,
    candidates: &[PolyMap],
    spec: &CriterionSpec,
    r: f64,
    from: usize,
    cfg: &SelectionConfig,
) -> Result<Selection> {
    match spec {
        CriterionSpec::Convex => select_convex(f, candidates, r, from, cfg),
        CriterionSpec::QClass => select_q(f, candidates, r, from, cfg),
        CriterionSpec::QTilde => select_qtilde(f, candidates, r, from, cfg),
        _ => select_by_criterion(f, candidates, spec, r, from, cfg),
    }
}

/// Normalized maps of candidate words; words that fail to expand are kept
/// as errors so indices stay aligned.
pub fn expand_candidates(words: &[AutomorphismWord]) -> Vec<Result<PolyMap>> {
    words.iter().map(|w| w.normalize().and_then(|n| n.to_polymap())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRecord {
    pub rho: f64,
    /// `sup_{||z|| <= ρ} ||φ_m(z) - f(z)||` (lower-bound estimate).
    pub distance: f64,
    /// `sum_k ||(φ_m - f)_k|| ρ^k`, an upper bound of the same quantity.
    pub coefficient_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub m: usize,
    pub r: f64,
    pub selection: Option<Selection>,
    pub failure: Option<String>,
    pub distances: Vec<DistanceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationRun {
    pub criterion: CriterionSpec,
    pub target_report: CriterionReport,
    pub steps: Vec<StepRecord>,
}

impl ApproximationRun {
    pub fn selected_indices(&self) -> Vec<usize> {
        self.steps.iter().filter_map(|s| s.selection.as_ref().map(|x| x.index)).collect()
    }
}

/// `sup` distance and coefficient bound of `φ - f` on the ball of radius `rho`.
pub fn ball_distance(phi: &PolyMap, f: &PolyMap, rho: f64, budget: &NormBudget) -> Result<DistanceRecord> {
    let diff = phi.sub(f)?;
    let distance = sup_norm_on_sphere(&diff, rho, budget).value;
    let mut coefficient_bound = 0.0;
    for k in 0..=diff.max_degree() {
        let part = diff.homogeneous_part(k);
        if part.coords().iter().all(|p| p.is_zero()) {
            continue;
        }
        let nk = sup_norm_on_sphere(&part, 1.0, budget).value;
        coefficient_bound += nk * libm::pow(rho, k as f64);
    }
    Ok(DistanceRecord { rho, distance, coefficient_bound })
}

/// Runs the selection chain over the schedule and records distances.
pub fn run_approximation(
    f: &PolyMap,
    candidates: &[AutomorphismWord],
    spec: &CriterionSpec,
    schedule: &DilationSchedule,
    test_radii: &[f64],
    cfg: &SelectionConfig,
) -> Result<ApproximationRun> {
    if test_radii.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::invalid("test radii must lie in (0, 1)"));
    }
    let target_report = spec.evaluate(f, &cfg.sample, &cfg.norm_budget)?;
    if !target_report.is_ok() {
        return Err(Error::precondition(format!("target does not satisfy the criterion: {}", target_report.summary())));
    }
    // Unusable candidates are replaced by a map that no selector admits.
    let maps: Vec<PolyMap> = expand_candidates(candidates)
        .into_iter()
        .map(|c| c.unwrap_or_else(|_| PolyMap::identity(f.dim()).scale(crate::C64::new(0.0, 0.0))))
        .collect();

    let mut from = 0;
    let mut steps = Vec::with_capacity(schedule.radii().len());
    for (i, &r) in schedule.radii().iter().enumerate() {
        let mut rec = StepRecord { m: i + 1, r, selection: None, failure: None, distances: Vec::new() };
        match select(f, &maps, spec, r, from, cfg) {
            Ok(sel) => {
                from = sel.index;
                let phi = maps[sel.index].dilate(r)?;
                for &rho in test_radii {
                    rec.distances.push(ball_distance(&phi, f, rho, &cfg.norm_budget)?);
                }
                rec.selection = Some(sel);
            }
            Err(Error::NoAdmissibleIndex) => rec.failure = Some("no admissible candidate index".into()),
            Err(e) => rec.failure = Some(format!("{e}")),
        }
        steps.push(rec);
    }
    Ok(ApproximationRun { criterion: spec.clone(), target_report, steps })
}

/// Worst pointwise distance over explicit points; used as an independent
/// lower bound in tests and reports.
pub fn sampled_distance(phi: &PolyMap, f: &PolyMap, points: &[Vec<crate::C64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for z in points {
        worst = worst.max(norm(&phi.sub(f)?.eval(z)?));
    }
    Ok(worst)
}
