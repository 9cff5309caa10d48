//! The built-in acceptance checks, each with its own runtime limit.
//!
//! Every check compares library output with an oracle computed here by an
//! independent route: closed forms, brute-force sampling, power iteration or
//! explicit coefficient scaling.

use std::time::Instant;

use anyhow::{bail, ensure, Result};
use rand::Rng as _;
use serde_json::{json, Value};

use ballchain_core::approximation::{
    partial_series, run_approximation, select_qtilde, series_sum, DilationSchedule, SelectionConfig,
};
use ballchain_core::automorphism::AutomorphismWord;
use ballchain_core::catalog;
use ballchain_core::criteria::{
    compute_delta, convexity_test, q_class_test, qtilde_test, starlike_test, CriterionSpec, DeltaBudget,
};
use ballchain_core::linalg::{distance, norm, scale_real, Matrix};
use ballchain_core::loewner::{
    flow, parametric_limit, reachable_eval, reachable_growth_bound, semigroup_check, subordination_check,
    FlowOptions, HerglotzField, Piece,
};
use ballchain_core::operator::{matrix_exp, numerical_range_extrema, operator_profile, Operator};
use ballchain_core::polymap::{MultiIndex, NormBudget, PolyMap};
use ballchain_core::resonance::{detect_resonance, detect_resonance_exact, GaussianRational, ResonanceKind};
use ballchain_core::sample::{gaussian_vector, make_sample, random_unit_vector, seeded, Rng, DEFAULT_RADII};
use ballchain_core::C64;

use crate::formats::num;

/// Name accepted by `suite --builtin`.
pub const BUILTIN_SUITE: &str = "paper-examples";

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 7 }
    }
}

/// What a check found, before timing is applied.
#[derive(Debug, Clone)]
pub struct Finding {
    pub passed: bool,
    pub summary: String,
    pub details: Vec<(&'static str, Value)>,
}

impl Finding {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Finding { passed, summary: summary.into(), details: Vec::new() }
    }

    fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.details.push((key, value.into()));
        self
    }
}

pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub limit_seconds: f64,
    run: fn(&SuiteConfig) -> Result<Finding>,
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub within_time: bool,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub finding: Finding,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>8.3}s / {:>4.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.finding.summary
        )
    }

    pub fn to_json(&self) -> Value {
        let details: serde_json::Map<String, Value> =
            self.finding.details.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect();
        json!({
            "id": self.id,
            "name": self.name,
            "passed": self.passed,
            "finding_passed": self.finding.passed,
            "limit_seconds": self.limit_seconds,
            "summary": self.finding.summary,
            "details": details,
            crate::report::WALL_TIME_KEY: self.seconds,
        })
    }
}

pub fn checks() -> Vec<Check> {
    vec![
        Check { id: 1, name: "ex3r-reproduction", limit_seconds: 1.0, run: ex3r_reproduction },
        Check { id: 2, name: "diagonal-resonance-family", limit_seconds: 1.0, run: diagonal_family },
        Check { id: 3, name: "inequality-chain", limit_seconds: 30.0, run: inequality_chain },
        Check { id: 4, name: "exponential-growth", limit_seconds: 10.0, run: exponential_growth },
        Check { id: 5, name: "linear-flow-exactness", limit_seconds: 5.0, run: linear_flow },
        Check { id: 6, name: "spirallike-flow", limit_seconds: 30.0, run: spirallike_flow },
        Check { id: 7, name: "semigroup-and-schwarz", limit_seconds: 10.0, run: semigroup_schwarz },
        Check { id: 8, name: "reachable-growth", limit_seconds: 10.0, run: reachable_growth },
        Check { id: 9, name: "closed-form-margins", limit_seconds: 30.0, run: closed_form_margins },
        Check { id: 10, name: "class-chain", limit_seconds: 5.0, run: class_chain },
        Check { id: 11, name: "dilation-stability", limit_seconds: 60.0, run: dilation_stability },
        Check { id: 12, name: "approximation-convergence", limit_seconds: 10.0, run: approximation_convergence },
        Check { id: 13, name: "series-bound", limit_seconds: 5.0, run: series_bound },
    ]
}

pub fn run_check(check: &Check, cfg: &SuiteConfig) -> CheckOutcome {
    let start = Instant::now();
    let finding = (check.run)(cfg).unwrap_or_else(|e| Finding::new(false, format!("error: {e:#}")));
    let seconds = start.elapsed().as_secs_f64();
    let within_time = seconds < check.limit_seconds;
    CheckOutcome {
        id: check.id,
        name: check.name,
        passed: finding.passed && within_time,
        within_time,
        seconds,
        limit_seconds: check.limit_seconds,
        finding,
    }
}

/// Runs the checks in order; parallelism lives inside the checks.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    checks().iter().map(|c| run_check(c, cfg)).collect()
}

fn unit_cloud(rng: &mut Rng, n: usize, count: usize) -> Vec<Vec<C64>> {
    (0..count).map(|_| random_unit_vector(rng, n)).collect()
}

fn ball_points(rng: &mut Rng, n: usize, radii: &[f64], per_radius: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::new();
    for &r in radii {
        for _ in 0..per_radius {
            out.push(scale_real(&random_unit_vector(rng, n), r));
        }
    }
    out
}

fn random_operator(rng: &mut Rng, n: usize) -> Result<Operator> {
    let rows: Vec<Vec<C64>> = (0..n).map(|_| gaussian_vector(rng, n)).collect();
    Ok(Operator::from_rows(&rows)?)
}

fn ex3r_reproduction(_: &SuiteConfig) -> Result<Finding> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let a = catalog::ex3r_operator();
    let p = operator_profile(&a)?;
    let v = detect_resonance(&p.eigenvalues, 1e-9)?;
    let err_m = (p.m - golden / 2.0).abs();
    let err_k = (p.kplus - golden).abs();
    let gap = (p.kplus - 2.0 * p.m).abs();
    let passed = err_m <= 1e-9 && err_k <= 1e-9 && gap <= 1e-9 && v.kind == ResonanceKind::Nonresonant;
    Ok(Finding::new(passed, format!("m={:.10} kplus={:.10} {}", p.m, p.kplus, v.kind.as_str()))
        .with("m", num(p.m))
        .with("kplus", num(p.kplus))
        .with("m_error", num(err_m))
        .with("kplus_error", num(err_k))
        .with("kplus_minus_2m", num(gap))
        .with("resonance", v.kind.as_str()))
}

fn diagonal_family(_: &SuiteConfig) -> Result<Finding> {
    let mut passed = true;
    let mut notes = Vec::new();
    for q in [2.5, 3.5, std::f64::consts::E] {
        let v = detect_resonance(&[C64::new(1.0, 0.0), C64::new(q, 0.0)], 1e-9)?;
        passed &= !v.is_resonant();
        notes.push(format!("q={q:.4}:{}", v.kind.as_str()));
    }
    for q in [2u32, 3] {
        let v = detect_resonance(&[C64::new(1.0, 0.0), C64::new(q as f64, 0.0)], 1e-9)?;
        // The only relation is lambda_2 = q * lambda_1.
        let ok = v.is_resonant()
            && v.witness.as_ref().is_some_and(|w| w.index == 1 && w.multi_index == MultiIndex::new(vec![q, 0]));
        let exact = detect_resonance_exact(&[
            GaussianRational::from_integers(1, 0),
            GaussianRational::from_integers(q as i64, 0),
        ])?;
        let exact_ok = exact.kind == ResonanceKind::Resonant
            && exact.witness.as_ref().is_some_and(|w| w.index == 1 && w.multi_index == MultiIndex::new(vec![q, 0]));
        passed &= ok && exact_ok;
        let w = v.witness.as_ref().map(|w| format!("lambda{} = {:?}", w.index + 1, w.multi_index.exponents()));
        notes.push(format!("q={q}:{}({})", v.kind.as_str(), w.unwrap_or_default()));
    }
    Ok(Finding::new(passed, notes.join(" ")))
}

/// Max and min of `Re <Hz, z>` over the cloud, each polished by shifted
/// power iteration (monotone in the Rayleigh quotient).
fn sphere_oracle(h: &Matrix, cloud: &[Vec<C64>]) -> (f64, f64, f64, f64) {
    let n = h.dim();
    let entries: Vec<C64> = (0..n * n).map(|k| h[(k / n, k % n)]).collect();
    // Re z* H z without allocating.
    let q = |z: &[C64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += entries[i * n + j] * z[j];
            }
            acc += (z[i].conj() * row).re;
        }
        acc
    };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut zlo, mut zhi) = (&cloud[0], &cloud[0]);
    for z in cloud {
        let v = q(z);
        if v < lo {
            lo = v;
            zlo = z;
        }
        if v > hi {
            hi = v;
            zhi = z;
        }
    }
    let shift = h.norm_frobenius() + 1.0;
    let polish = |start: &[C64], sign: f64| -> f64 {
        let mut z = start.to_vec();
        let mut best = sign * q(&z);
        for _ in 0..2000 {
            let hz = h.matvec(&z);
            let w: Vec<C64> = z.iter().zip(&hz).map(|(a, b)| a * shift + b * sign).collect();
            let nw = norm(&w);
            z = scale_real(&w, 1.0 / nw);
            let v = sign * q(&z);
            if v <= best + 1e-15 {
                best = best.max(v);
                break;
            }
            best = v;
        }
        sign * best
    };
    (lo, hi, polish(zlo, -1.0).min(lo), polish(zhi, 1.0).max(hi))
}

fn inequality_chain(cfg: &SuiteConfig) -> Result<Finding> {
    let mut rng = seeded(cfg.seed ^ 0x0300);
    let clouds = [unit_cloud(&mut rng, 2, 100_000), unit_cloud(&mut rng, 3, 100_000)];
    let mut worst_chain: f64 = f64::NEG_INFINITY;
    let mut worst_oracle: f64 = 0.0;
    let mut worst_raw: f64 = 0.0;
    let tol = 1e-7;
    for i in 0..1000 {
        let n = 2 + i % 2;
        let a = random_operator(&mut rng, n)?;
        let p = operator_profile(&a)?;
        let chain = [p.m - p.kplus, p.kplus - p.vr, p.vr - p.opnorm, p.opnorm - 2.0 * p.vr];
        worst_chain = chain.into_iter().fold(worst_chain, f64::max);
        let (raw_lo, raw_hi, lo, hi) = sphere_oracle(&a.matrix().hermitian_part(), &clouds[n - 2]);
        ensure!(raw_lo >= p.m - tol && raw_hi <= p.k + tol, "sampled value outside [m, k] for matrix {i}");
        worst_oracle = worst_oracle.max((lo - p.m).abs()).max((hi - p.k).abs());
        worst_raw = worst_raw.max((raw_lo - p.m).abs()).max((raw_hi - p.k).abs());
    }
    let passed = worst_chain <= tol && worst_oracle <= 1e-4;
    Ok(Finding::new(passed, format!("chain slack {worst_chain:.2e}, oracle gap {worst_oracle:.2e}"))
        .with("worst_chain_violation", num(worst_chain))
        .with("worst_oracle_gap", num(worst_oracle))
        .with("worst_raw_sample_gap", num(worst_raw)))
}

fn exponential_growth(cfg: &SuiteConfig) -> Result<Finding> {
    let mut rng = seeded(cfg.seed ^ 0x0400);
    let slack = 1e-9;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut count = 0;
    for i in 0..50 {
        let n = 2 + i % 2;
        let b = random_operator(&mut rng, n)?;
        let (mb, _) = numerical_range_extrema(&b);
        let target: f64 = rng.random_range(0.05..1.0);
        let a = Operator::new(b.matrix().add(&Matrix::identity(n).scaled(C64::new(target - mb, 0.0))))?;
        let (m, k) = numerical_range_extrema(&a);
        ensure!(m > 0.0, "shifted operator has m <= 0");
        for t in [0.05, 0.5, 1.0, 2.0, 5.0] {
            let e = matrix_exp(&a, t)?;
            for _ in 0..20 {
                let u = random_unit_vector(&mut rng, n);
                let g = norm(&e.apply(&u));
                // Relative violations of both sides.
                worst = worst.max(((m * t).exp() - g) / (m * t).exp()).max((g - (k * t).exp()) / (k * t).exp());
                count += 1;
            }
        }
    }
    Ok(Finding::new(worst <= slack, format!("{count} samples, worst relative violation {worst:.2e}"))
        .with("worst_relative_violation", num(worst))
        .with("samples", count))
}

/// `e^{sA}` for upper triangular 2x2 `A` with distinct diagonal entries.
fn triangular_exp(a: &Matrix, s: f64) -> Matrix {
    let (p, b, d) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
    let (ep, ed) = ((p * s).exp(), (d * s).exp());
    let mut out = Matrix::zeros(2);
    out[(0, 0)] = ep;
    out[(1, 1)] = ed;
    out[(0, 1)] = b * (ep - ed) / (p - d);
    out
}

fn linear_flow(cfg: &SuiteConfig) -> Result<Finding> {
    let mut rng = seeded(cfg.seed ^ 0x0500);
    let ops = [
        catalog::ex3r_operator(),
        Operator::from_rows(&[
            vec![C64::new(1.0, 0.5), C64::new(0.3, -0.2)],
            vec![C64::new(0.0, 0.0), C64::new(2.0, -1.0)],
        ])?,
    ];
    let opts = FlowOptions::default();
    let mut worst: f64 = 0.0;
    for a in &ops {
        let field = HerglotzField::linear(a.clone(), 5.0)?;
        for _ in 0..50 {
            let r: f64 = rng.random_range(0.05..0.99);
            let z = scale_real(&random_unit_vector(&mut rng, 2), r);
            let t: f64 = rng.random_range(0.0..5.0);
            let v = flow(&field, &z, 0.0, t, &opts)?.value;
            worst = worst.max(distance(&v, &triangular_exp(a.matrix(), -t).matvec(&z)));
        }
    }
    Ok(Finding::new(worst <= 1e-8, format!("100 points, max error {worst:.2e}")).with("max_error", num(worst)))
}

fn spirallike_flow(cfg: &SuiteConfig) -> Result<Finding> {
    let a_coef = 0.3;
    let f = catalog::shear_map(a_coef);
    let id = Operator::identity(2);
    let sample = make_sample(2, &DEFAULT_RADII, 200, 0, cfg.seed)?;
    let opts = FlowOptions::default();
    let mut rng = seeded(cfg.seed ^ 0x0600);
    let points = ball_points(&mut rng, 2, &[0.2, 0.5, 0.8, 0.95], 5);

    // v = f^{-1}(e^{-t} f(z)) with f^{-1}(w) = (w1 - a w2^2, w2).
    let oracle = |z: &[C64], t: f64| -> Vec<C64> {
        let w = scale_real(&f.eval(z).unwrap(), (-t).exp());
        vec![w[0] - w[1] * w[1] * a_coef, w[1]]
    };
    let mut worst_sub: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for t in [0.5, 1.0, 2.0] {
        let field = HerglotzField::with_sample(id.clone(), vec![Piece::spirallike(t, f.clone())], &sample)?;
        for z in &points {
            worst_sub = worst_sub.max(subordination_check(&f, &id, z, t, &sample, &opts)?);
            let v = flow(&field, z, 0.0, t, &opts)?.value;
            worst_oracle = worst_oracle.max(distance(&v, &oracle(z, t)));
        }
    }

    let long = HerglotzField::with_sample(id.clone(), vec![Piece::spirallike(20.0, f.clone())], &sample)?;
    let inner_points = ball_points(&mut rng, 2, &[0.1, 0.25, 0.4, 0.5], 5);
    let mut worst_limit: f64 = 0.0;
    for z in &inner_points {
        let lim = parametric_limit(&long, z, 20.0, 0.0, &opts)?;
        ensure!(lim.t == 20.0, "parametric limit stopped early at t = {}", lim.t);
        worst_limit = worst_limit.max(distance(&lim.value, &f.eval(z)?));
    }
    let passed = worst_sub <= 1e-8 && worst_oracle <= 1e-8 && worst_limit <= 1e-4;
    Ok(Finding::new(
        passed,
        format!("subordination {worst_sub:.2e}, closed form {worst_oracle:.2e}, limit {worst_limit:.2e}"),
    )
    .with("subordination_residual", num(worst_sub))
    .with("closed_form_error", num(worst_oracle))
    .with("parametric_limit_error", num(worst_limit)))
}

fn semigroup_schwarz(cfg: &SuiteConfig) -> Result<Finding> {
    let mut rng = seeded(cfg.seed ^ 0x0700);
    let opts = FlowOptions { record_trajectory: true, ..FlowOptions::default() };
    let mut worst_residual: f64 = 0.0;
    let mut worst_increase: f64 = 0.0;
    let mut per_field = Vec::new();
    for (name, field) in catalog::builtin_fields()? {
        let total = field.total_time();
        let mut field_residual: f64 = 0.0;
        for z in ball_points(&mut rng, field.dim(), &[0.3, 0.6, 0.9], 4) {
            let mut times = [rng.random_range(0.0..total), rng.random_range(0.0..total), rng.random_range(0.0..total)];
            times.sort_by(f64::total_cmp);
            field_residual = field_residual.max(semigroup_check(&field, &z, times[0], times[1], times[2], &opts)?);
            let run = flow(&field, &z, 0.0, total, &opts)?;
            worst_increase = worst_increase.max(run.max_norm_increase());
        }
        worst_residual = worst_residual.max(field_residual);
        per_field.push(json!({"field": name, "semigroup_residual": num(field_residual)}));
    }
    let passed = worst_residual <= 1e-7 && worst_increase <= 1e-9;
    Ok(Finding::new(passed, format!("residual {worst_residual:.2e}, norm increase {worst_increase:.2e}"))
        .with("semigroup_residual", num(worst_residual))
        .with("max_norm_increase", num(worst_increase))
        .with("fields", per_field))
}

fn reachable_growth(cfg: &SuiteConfig) -> Result<Finding> {
    let mut rng = seeded(cfg.seed ^ 0x0800);
    let opts = FlowOptions::default();
    let mut worst_ratio: f64 = 0.0;
    let mut count = 0;
    for (_, field) in catalog::builtin_fields()? {
        for z in ball_points(&mut rng, field.dim(), &[0.1, 0.3, 0.5, 0.7, 0.9, 0.95], 4) {
            let w = reachable_eval(&field, &z, &opts)?;
            worst_ratio = worst_ratio.max(norm(&w) / reachable_growth_bound(&field, &z));
            count += 1;
        }
    }
    Ok(Finding::new(worst_ratio <= 1.0, format!("{count} samples, max |f(z)|/bound = {worst_ratio:.4}"))
        .with("max_ratio", num(worst_ratio)))
}

fn closed_form_margins(cfg: &SuiteConfig) -> Result<Finding> {
    // Starlike: Re <Df^{-1} f, z>/|z|^2 = 1 - Re(a z2^2 conj(z1))/r^2, whose
    // infimum on the r-sphere is 1 - 2 a r / (3 sqrt 3).
    let (a, r) = (0.5, 0.99);
    let oracle = 1.0 - 2.0 * a * r / (3.0 * 3f64.sqrt());
    let sphere = make_sample(2, &[r], 20_000, 0, cfg.seed)?;
    let rep = starlike_test(&catalog::shear_map(a), &sphere)?;
    let normalized = rep.detail("normalized_margin").unwrap_or(f64::NAN);
    let star_ok = (normalized - oracle).abs() <= 5e-3 && normalized >= oracle - 1e-12;

    // Convex: 1 - Re <Df^{-1} D^2 f(v, v), z> = 1 - 2 a Re(v2^2 conj(z1)), with
    // infimum 1 - 2 a r over the r-ball, tending to 1 - 2a = 0.2.
    let c = 0.4;
    let f = catalog::shear_map(c);
    let dense = make_sample(2, &DEFAULT_RADII, 400, 4, cfg.seed)?;
    let conv = convexity_test(&f, &dense)?;
    let mut delta_gap: f64 = 0.0;
    let mut last = f64::INFINITY;
    let mut decreasing = true;
    for rr in [0.9, 0.99, 0.999] {
        let d = compute_delta(&f, rr, &DeltaBudget::default())?;
        let margin = 1.0 - d.value;
        delta_gap = delta_gap.max((margin - (1.0 - 2.0 * c * rr)).abs());
        decreasing &= margin < last;
        last = margin;
    }
    let conv_ok = conv.min_margin >= 1.0 - 2.0 * c && delta_gap <= 1e-6 && decreasing && last - 0.2 <= 1e-3;
    Ok(Finding::new(
        star_ok && conv_ok,
        format!(
            "starlike {normalized:.6} vs {oracle:.6}; convex min {:.4}, margin at r=0.999 {last:.6}",
            conv.min_margin
        ),
    )
    .with("starlike_normalized_margin", num(normalized))
    .with("starlike_oracle", num(oracle))
    .with("convex_sampled_margin", num(conv.min_margin))
    .with("convex_margin_r0999", num(last))
    .with("convex_delta_gap", num(delta_gap)))
}

fn class_chain(cfg: &SuiteConfig) -> Result<Finding> {
    let budget = NormBudget::default();
    let mut passed = true;
    let mut min_qtilde_margin = f64::INFINITY;
    for f in catalog::ktilde_examples() {
        let s = make_sample(f.dim(), &DEFAULT_RADII, 100, 0, cfg.seed)?;
        let q = qtilde_test(&f, &budget)?;
        min_qtilde_margin = min_qtilde_margin.min(q.min_margin);
        passed &= q.is_ok() && q.min_margin >= 0.5 && q_class_test(&f, &s)?.is_ok();
    }
    let qt = catalog::qtilde_examples();
    for f in &qt {
        let s = make_sample(f.dim(), &DEFAULT_RADII, 100, 0, cfg.seed)?;
        passed &= qtilde_test(f, &budget)?.is_ok() && q_class_test(f, &s)?.is_ok();
    }
    Ok(Finding::new(passed, format!("{} Q~ examples, min Q~ margin of K~ examples {min_qtilde_margin:.4}", qt.len()))
        .with("min_ktilde_qtilde_margin", num(min_qtilde_margin)))
}

fn dilation_stability(cfg: &SuiteConfig) -> Result<Finding> {
    let budget = NormBudget::default();
    let schedule = DilationSchedule::default();
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    let mut evaluations = 0;
    for e in catalog::class_examples() {
        let s = make_sample(e.map.dim(), &DEFAULT_RADII, 100, 2, cfg.seed)?;
        let parent_full = e.spec.evaluate(&e.map, &s, &budget)?;
        ensure!(parent_full.is_ok(), "built-in example {} fails its own criterion", e.name);
        for &r in schedule.radii() {
            let phi = e.map.dilate(r)?;
            let child = e.spec.evaluate(&phi, &s, &budget)?;
            let parent = if e.spec.is_sampled() { e.spec.evaluate(&e.map, &s.scaled(r), &budget)? } else { parent_full.clone() };
            // Rounding allowance relative to the margin's size.
            let shortfall = (parent.min_margin - child.min_margin) / (1.0 + parent.min_margin.abs());
            worst = worst.max(shortfall);
            evaluations += 1;
            if !child.is_ok() || shortfall > 1e-9 {
                failures.push(format!("{} at r={r}", e.name));
            }
        }
    }
    let passed = failures.is_empty();
    Ok(Finding::new(passed, format!("{evaluations} dilations, worst relative shortfall {worst:.2e}"))
        .with("worst_shortfall", num(worst))
        .with("failures", failures))
}

fn approximation_convergence(cfg: &SuiteConfig) -> Result<Finding> {
    let a = 0.4;
    let f = catalog::shear_map(a);
    let words: Vec<AutomorphismWord> = vec![catalog::shear_word(a)];
    let schedule = DilationSchedule::default();
    let sample = make_sample(2, &DEFAULT_RADII, 100, 2, cfg.seed)?;
    let run = run_approximation(&f, &words, &CriterionSpec::Convex, &schedule, &[0.5], &SelectionConfig::new(sample))?;
    let mut worst: f64 = 0.0;
    let mut last = f64::NAN;
    for step in &run.steps {
        ensure!(step.selection.is_some(), "step {} selected nothing: {:?}", step.m, step.failure);
        let d = &step.distances[0];
        let exact = a * (1.0 - step.r) * 0.25;
        worst = worst.max((d.distance - exact).abs());
        last = d.distance;
    }
    let passed = worst <= 1e-10 && last < 1e-3 && run.steps.len() == 10;
    Ok(Finding::new(passed, format!("max deviation {worst:.2e}, distance at m=10 {last:.3e}"))
        .with("max_deviation", num(worst))
        .with("final_distance", num(last)))
}

fn series_bound(cfg: &SuiteConfig) -> Result<Finding> {
    let terms = 200;
    let mut worst: f64 = 0.0;
    let mut raw: Vec<Value> = Vec::new();
    for i in 1..=9 {
        let x = i as f64 / 10.0;
        let partial = partial_series(x, terms);
        // Exact remainder sum_{k > N+1} k x^k, N the number of terms.
        let n = (terms + 1) as f64;
        let tail = x.powf(n + 1.0) * (n + 1.0 - n * x) / ((1.0 - x) * (1.0 - x));
        worst = worst.max((series_sum(x) - (partial + tail)).abs());
        raw.push(json!({"x": x, "closed_minus_partial": num(series_sum(x) - partial), "tail": num(tail)}));
    }

    // Candidates converge to the target; the target itself closes the list.
    let target = catalog::quadratic_map(0.4);
    let mut cands: Vec<PolyMap> =
        [3e-1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8].iter().map(|d| catalog::quadratic_map(0.4 + d)).collect();
    cands.push(target.clone());
    let sel_cfg = SelectionConfig::new(make_sample(2, &DEFAULT_RADII, 20, 0, cfg.seed)?);
    let mut from = 0;
    let mut admitted = Vec::new();
    for &r in DilationSchedule::default().radii() {
        let s = select_qtilde(&target, &cands, r, from, &sel_cfg)?;
        ensure!(s.screen <= s.threshold, "admitted candidate exceeds the distance budget");
        let direct = qtilde_test(&cands[s.index].dilate(r)?, &NormBudget::default())?;
        if !direct.is_ok() {
            bail!("dilation of candidate {} at r={r} fails the Q~ test", s.index);
        }
        from = s.index;
        admitted.push(s.index);
    }
    Ok(Finding::new(worst <= 1e-12, format!("series gap {worst:.2e}, admitted {admitted:?}"))
        .with("series_gap", num(worst))
        .with("raw_gaps", raw)
        .with("admitted", admitted))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_exp_matches_library() {
        let a = catalog::ex3r_operator();
        let e = matrix_exp(&a, -1.3).unwrap();
        assert!(e.matrix().max_abs_diff(&triangular_exp(a.matrix(), -1.3)) < 1e-13);
    }

    #[test]
    fn ids_are_sequential() {
        let ids: Vec<u8> = checks().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=13).collect::<Vec<u8>>());
    }
}

