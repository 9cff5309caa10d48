//! Subcommands. Each one produces an [`Envelope`]; `main` writes it and maps
//! the outcome to an exit code.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};

use ballchain_core::approximation::{run_approximation, ApproximationRun, DilationSchedule, SelectionConfig, DEFAULT_TEST_RADII};
use ballchain_core::criteria::{
    caratheodory_test, verify_growth_bounds, CriterionReport, CriterionSpec, GRegion,
};
use ballchain_core::loewner::{flow, reachable_eval, reachable_growth_bound, rejection_report, semigroup_check, FlowOptions, HerglotzField, VALIDATION_PER_SPHERE};
use ballchain_core::linalg::norm;
use ballchain_core::operator::{operator_profile, TAU_LIN};
use ballchain_core::polymap::{NormBudget, PolyMap};
use ballchain_core::resonance::{
    detect_resonance, detect_resonance_exact, real_resonance_check, ResonanceVerdict, ResonanceWitness, DEFAULT_TOLERANCE,
};
use ballchain_core::sample::{make_sample, DEFAULT_RADII};
use ballchain_core::Error as CoreError;

use crate::formats::{
    num, operator_json, polymap_json, read_json, vector_json, CandidatesDto, FieldDto, FieldError, MapOrWord,
    OperatorDto, PointsDto,
};
use crate::report::{criterion_report_json, table, Envelope};
use crate::suite::{self, SuiteConfig, BUILTIN_SUITE};

#[derive(Debug, Parser)]
#[command(name = "ballchain", version, about = "Operator invariants, mapping criteria and Loewner flows on the unit ball")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every sampler.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Tolerance override (resonance tolerance for `operator`, integrator
    /// tolerance for `flow` and `reach`).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "BALLCHAIN_JOBS")]
    pub jobs: Option<usize>,
    /// Report path (JSON).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sphere radii: `a:b` (built-in radii within [a, b]), `a:b:n` (n evenly
    /// spaced) or a comma list.
    #[arg(long, global = true)]
    pub radii: Option<String>,
    /// Sample points per sphere.
    #[arg(long = "per-sphere", global = true)]
    pub per_sphere: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerical range, spectral abscissa and resonance of an operator.
    Operator {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Sampled membership test of a map.
    MapTest {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        criterion: String,
        /// Operator for `spirallike`, `caratheodory` and `growth-bounds`.
        #[arg(long)]
        operator: Option<PathBuf>,
        /// Region for `g-starlike`: `half-plane`, `disk:ALPHA` or `sector:ALPHA`.
        #[arg(long, default_value = "half-plane")]
        region: String,
        /// Tangent vectors per sample point.
        #[arg(long, default_value_t = 2)]
        tangents: usize,
    },
    /// Transition maps of a Herglotz field.
    Flow {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// End time; defaults to the field's horizon.
        #[arg(long)]
        t: Option<f64>,
        /// Flow starting points per sphere when `--points` is absent.
        #[arg(long = "points-per-sphere", default_value_t = 4)]
        points_per_sphere: usize,
    },
    /// Reachable-family element `e^{TA} v(., T)` and its growth bound.
    Reach {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long = "points-per-sphere", default_value_t = 4)]
        points_per_sphere: usize,
    },
    /// Dilation-and-selection approximation run.
    Approx {
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        criterion: String,
        #[arg(long)]
        operator: Option<PathBuf>,
        #[arg(long, default_value = "half-plane")]
        region: String,
        /// `default`, `geometric:N` or a comma list of radii.
        #[arg(long, default_value = "default")]
        schedule: String,
        /// Comma list of test radii.
        #[arg(long = "test-radii")]
        test_radii: Option<String>,
    },
    /// Built-in acceptance suite.
    Suite {
        #[arg(long)]
        builtin: String,
    },
}

/// Finished command: the report plus a printable table.
pub struct Outcome {
    pub envelope: Envelope,
    pub table: Vec<(String, String)>,
}

/// Core errors that mean "the criterion failed" rather than "bad input".
fn is_criterion_failure(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::PreconditionViolated(_)
            | CoreError::SingularJacobian { .. }
            | CoreError::NoConvergence(_)
            | CoreError::InvariantViolated(_)
            | CoreError::IntegrationFailure { .. }
            | CoreError::ToleranceUnreachable { .. }
            | CoreError::SpirallikeRejected { .. }
            | CoreError::NoAdmissibleIndex
    )
}

fn failure_result(e: &CoreError) -> Value {
    json!({
        "error": e.to_string(),
        "rejection": rejection_report(e).map(criterion_report_json),
    })
}

/// Splits core errors into a failing result or an input error.
fn split<T>(r: ballchain_core::Result<T>) -> Result<std::result::Result<T, Value>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if is_criterion_failure(&e) => Ok(Err(failure_result(&e))),
        Err(e) => Err(anyhow!(e)),
    }
}

pub fn parse_radii(spec: Option<&str>) -> Result<Vec<f64>> {
    let Some(spec) = spec else { return Ok(DEFAULT_RADII.to_vec()) };
    let parse = |s: &str| s.trim().parse::<f64>().with_context(|| format!("bad radius {s:?}"));
    let radii: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        match parts.as_slice() {
            [a, b] => {
                let (a, b) = (parse(a)?, parse(b)?);
                DEFAULT_RADII.iter().copied().filter(|&r| r >= a - 1e-12 && r <= b + 1e-12).collect()
            }
            [a, b, n] => {
                let (a, b) = (parse(a)?, parse(b)?);
                let n: usize = n.trim().parse().context("bad radius count")?;
                match n {
                    0 => Vec::new(),
                    1 => vec![a],
                    _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
                }
            }
            _ => bail!("radii range must be a:b or a:b:n"),
        }
    } else {
        spec.split(',').map(parse).collect::<Result<_>>()?
    };
    if radii.is_empty() {
        bail!("radius specification {spec:?} selects no radii");
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        bail!("radii must lie in (0, 1)");
    }
    Ok(radii)
}

fn parse_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',').map(|s| s.trim().parse::<f64>().with_context(|| format!("bad number {s:?}"))).collect()
}

fn parse_region(s: &str) -> Result<GRegion> {
    let (kind, alpha) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a.trim().parse::<f64>().context("bad region order")?)),
        None => (s, None),
    };
    Ok(match (kind, alpha) {
        ("half-plane", None) => GRegion::HalfPlane,
        ("disk", Some(a)) => GRegion::disk(a)?,
        ("sector", Some(a)) => GRegion::sector(a)?,
        _ => bail!("unknown region {s:?}; use half-plane, disk:ALPHA or sector:ALPHA"),
    })
}

fn read_operator(path: &std::path::Path) -> Result<ballchain_core::operator::Operator> {
    Ok(read_json::<OperatorDto>(path)?.parse()?.operator)
}

/// The criteria reachable through `map-test` and `approx`.
enum Selected {
    Spec(CriterionSpec),
    Caratheodory(ballchain_core::operator::Operator),
    Growth(ballchain_core::operator::Operator),
}

fn parse_criterion(name: &str, operator: Option<&PathBuf>, region: &str) -> Result<Selected> {
    let op = || -> Result<_> {
        let path = operator.ok_or_else(|| anyhow!("criterion {name} needs --operator"))?;
        read_operator(path)
    };
    Ok(match name {
        "spirallike" => Selected::Spec(CriterionSpec::Spirallike(op()?)),
        "starlike" => Selected::Spec(CriterionSpec::Starlike),
        "g-starlike" => Selected::Spec(CriterionSpec::GStarlike(parse_region(region)?)),
        "convex" => Selected::Spec(CriterionSpec::Convex),
        "q-class" => Selected::Spec(CriterionSpec::QClass),
        "qtilde" => Selected::Spec(CriterionSpec::QTilde),
        "ktilde" => Selected::Spec(CriterionSpec::KTilde),
        "caratheodory" => Selected::Caratheodory(op()?),
        "growth-bounds" => Selected::Growth(op()?),
        _ => bail!(
            "unknown criterion {name:?}; use spirallike, starlike, g-starlike, convex, q-class, qtilde, ktilde, caratheodory or growth-bounds"
        ),
    })
}

fn global_echo(g: &GlobalOpts, radii: &[f64]) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("seed".into(), json!(g.seed));
    m.insert("tol".into(), g.tol.map(num).unwrap_or(Value::Null));
    m.insert("radii".into(), json!(radii));
    m.insert("per_sphere".into(), json!(g.per_sphere));
    m
}

fn path_str(p: &std::path::Path) -> String {
    p.display().to_string()
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Operator { input } => operator_cmd(g, input),
        Command::MapTest { map, criterion, operator, region, tangents } => {
            map_test_cmd(g, map, criterion, operator.as_ref(), region, *tangents)
        }
        Command::Flow { field, points, s, t, points_per_sphere } => {
            flow_cmd(g, field, points.as_ref(), *s, *t, *points_per_sphere)
        }
        Command::Reach { field, points, points_per_sphere } => reach_cmd(g, field, points.as_ref(), *points_per_sphere),
        Command::Approx { target, candidates, criterion, operator, region, schedule, test_radii } => approx_cmd(
            g,
            target,
            candidates,
            criterion,
            operator.as_ref(),
            region,
            schedule,
            test_radii.as_deref(),
        ),
        Command::Suite { builtin } => suite_cmd(g, builtin),
    }
}

fn witness_json(w: &ResonanceWitness) -> Value {
    json!({"index": w.index, "multi_index": w.multi_index.exponents(), "residual": num(w.residual)})
}

fn resonance_json(v: &ResonanceVerdict, mode: &str) -> Value {
    json!({
        "mode": mode,
        "kind": v.kind.as_str(),
        "witness": v.witness.as_ref().map(witness_json),
        "real_resonant": v.real_resonant,
        "real_witness": v.real_witness.as_ref().map(witness_json),
        "search_bound": v.search_bound,
    })
}

fn operator_cmd(g: &GlobalOpts, input: &std::path::Path) -> Result<Outcome> {
    let parsed = read_json::<OperatorDto>(input)?.parse()?;
    let a = &parsed.operator;
    let tol = g.tol.unwrap_or(DEFAULT_TOLERANCE);
    let mut config = serde_json::Map::new();
    config.insert("in".into(), json!(path_str(input)));
    config.insert("tol".into(), num(tol));
    let config = Value::Object(config);

    let p = match split(operator_profile(a))? {
        Ok(p) => p,
        Err(result) => {
            let envelope = Envelope { command: "operator", config, seed: g.seed, passed: false, result };
            return Ok(Outcome { envelope, table: vec![("status".into(), "invariant failure".into())] });
        }
    };
    // Exact input with triangular structure has exactly known eigenvalues.
    let exact_diag = parsed.exact.as_ref().and_then(|rows| {
        let n = rows.len();
        let zero = |i: usize, j: usize| rows[i][j].re.is_zero() && rows[i][j].im.is_zero();
        let upper = (0..n).all(|i| (0..i).all(|j| zero(i, j)));
        let lower = (0..n).all(|i| (i + 1..n).all(|j| zero(i, j)));
        (upper || lower).then(|| (0..n).map(|i| rows[i][i].clone()).collect::<Vec<_>>())
    });
    let (verdict, mode) = match &exact_diag {
        Some(d) => (detect_resonance_exact(d)?, "exact"),
        None => (detect_resonance(&p.eigenvalues, tol)?, "float"),
    };
    let rc = real_resonance_check(p.m, p.kminus, p.kplus, verdict.real_resonant, tol);
    let chain = p.chain_violation();
    let passed = chain <= TAU_LIN && rc.consistent;
    let result = json!({
        "operator": operator_json(a),
        "dim": p.dim,
        "m": num(p.m),
        "k": num(p.k),
        "kminus": num(p.kminus),
        "kplus": num(p.kplus),
        "numerical_radius": num(p.vr),
        "operator_norm": num(p.opnorm),
        "eigenvalues": vector_json(&p.eigenvalues),
        "growth_rate_estimate": num(p.limit_estimate),
        "chain_violation": num(chain),
        "resonance": resonance_json(&verdict, mode),
        "real_resonance_check": {
            "applicable": rc.applicable,
            "kplus_equals_twice_m": rc.kplus_equals_twice_m,
            "kplus_equals_twice_kminus": rc.kplus_equals_twice_kminus,
            "consistent": rc.consistent,
        },
    });
    let table = vec![
        ("m".into(), format!("{:.10}", p.m)),
        ("k".into(), format!("{:.10}", p.k)),
        ("kminus".into(), format!("{:.10}", p.kminus)),
        ("kplus".into(), format!("{:.10}", p.kplus)),
        ("numerical radius".into(), format!("{:.10}", p.vr)),
        ("operator norm".into(), format!("{:.10}", p.opnorm)),
        ("resonance".into(), format!("{} ({mode})", verdict.kind.as_str())),
        ("real resonance".into(), verdict.real_resonant.to_string()),
    ];
    Ok(Outcome { envelope: Envelope { command: "operator", config, seed: g.seed, passed, result }, table })
}

fn read_map(path: &std::path::Path) -> Result<PolyMap> {
    read_json::<MapOrWord>(path)?.parse()
}

fn report_table(r: &CriterionReport) -> Vec<(String, String)> {
    let mut t = vec![
        ("criterion".into(), r.criterion.as_str().to_string()),
        ("verdict".into(), r.verdict.as_str().to_string()),
        ("min margin".into(), format!("{}", r.min_margin)),
        ("samples".into(), r.sample_count.to_string()),
    ];
    if let Some(reason) = &r.reason {
        t.push(("reason".into(), reason.clone()));
    }
    for (k, v) in &r.details {
        t.push(((*k).to_string(), format!("{v}")));
    }
    t
}

fn map_test_cmd(
    g: &GlobalOpts,
    map: &std::path::Path,
    criterion: &str,
    operator: Option<&PathBuf>,
    region: &str,
    tangents: usize,
) -> Result<Outcome> {
    let f = read_map(map)?;
    let radii = parse_radii(g.radii.as_deref())?;
    let per_sphere = g.per_sphere.unwrap_or(200);
    let mut config = global_echo(g, &radii);
    config.insert("map".into(), json!(path_str(map)));
    config.insert("criterion".into(), json!(criterion));
    config.insert("operator".into(), json!(operator.map(|p| path_str(p))));
    config.insert("region".into(), json!(region));
    config.insert("tangents".into(), json!(tangents));
    config.insert("per_sphere".into(), json!(per_sphere));
    let config = Value::Object(config);

    let selected = parse_criterion(criterion, operator, region)?;
    let sample = make_sample(f.dim(), &radii, per_sphere, tangents, g.seed)?;
    let budget = NormBudget { seed: g.seed, ..NormBudget::default() };
    let outcome = match &selected {
        Selected::Spec(spec) => spec.evaluate(&f, &sample, &budget),
        Selected::Caratheodory(a) => caratheodory_test(&f, a, &sample),
        Selected::Growth(a) => verify_growth_bounds(&f, a, &sample),
    };
    let (passed, result, table) = match split(outcome)? {
        Ok(rep) => {
            let mut result = criterion_report_json(&rep);
            result["map"] = polymap_json(&f);
            (rep.is_ok(), result, report_table(&rep))
        }
        Err(result) => (false, result, vec![("status".into(), "criterion failure".into())]),
    };
    Ok(Outcome { envelope: Envelope { command: "map-test", config, seed: g.seed, passed, result }, table })
}

fn load_field(
    g: &GlobalOpts,
    path: &std::path::Path,
    radii: &[f64],
) -> Result<std::result::Result<HerglotzField, Value>> {
    let dto: FieldDto = read_json(path)?;
    let dim = dto.a.dim;
    let sample = make_sample(dim, radii, g.per_sphere.unwrap_or(VALIDATION_PER_SPHERE), 0, g.seed)?;
    match dto.parse(&sample) {
        Ok(f) => Ok(Ok(f)),
        Err(FieldError::Input(e)) => Err(e),
        Err(FieldError::Core(e)) => split::<HerglotzField>(Err(e)),
    }
}

fn flow_points(g: &GlobalOpts, dim: usize, points: Option<&PathBuf>, radii: &[f64], per_sphere: usize) -> Result<Vec<Vec<ballchain_core::C64>>> {
    match points {
        Some(p) => read_json::<PointsDto>(p)?.parse(),
        None => Ok(make_sample(dim, radii, per_sphere, 0, g.seed ^ 0x9e37_79b9)?.points),
    }
}

fn field_echo(g: &GlobalOpts, radii: &[f64], field: &std::path::Path, points: Option<&PathBuf>, pps: usize, tol: f64) -> serde_json::Map<String, Value> {
    let mut config = global_echo(g, radii);
    config.insert("field".into(), json!(path_str(field)));
    config.insert("points".into(), json!(points.map(|p| path_str(p))));
    config.insert("points_per_sphere".into(), json!(pps));
    config.insert("tol".into(), num(tol));
    config
}

fn flow_cmd(g: &GlobalOpts, field_path: &std::path::Path, points: Option<&PathBuf>, s: f64, t: Option<f64>, pps: usize) -> Result<Outcome> {
    let radii = parse_radii(g.radii.as_deref())?;
    let tol = g.tol.unwrap_or(FlowOptions::default().tol);
    let mut config = field_echo(g, &radii, field_path, points, pps, tol);
    config.insert("s".into(), num(s));
    config.insert("t".into(), t.map(num).unwrap_or(Value::Null));
    let config = Value::Object(config);
    let fail = |result: Value| Outcome {
        envelope: Envelope { command: "flow", config: config.clone(), seed: g.seed, passed: false, result },
        table: vec![("status".into(), "criterion failure".into())],
    };

    let field = match load_field(g, field_path, &radii)? {
        Ok(f) => f,
        Err(v) => return Ok(fail(v)),
    };
    let t = t.unwrap_or(field.total_time());
    let opts = FlowOptions { tol, record_trajectory: true, ..FlowOptions::default() };
    let pts = flow_points(g, field.dim(), points, &radii, pps)?;
    let mut rows = Vec::with_capacity(pts.len());
    let mut worst_semigroup: f64 = 0.0;
    let mut worst_increase: f64 = 0.0;
    let mut steps = 0;
    for z in &pts {
        let run = match split(flow(&field, z, s, t, &opts))? {
            Ok(r) => r,
            Err(v) => return Ok(fail(v)),
        };
        let mid = 0.5 * (s + t);
        let semi = match split(semigroup_check(&field, z, s, mid, t, &opts))? {
            Ok(r) => r,
            Err(v) => return Ok(fail(v)),
        };
        worst_semigroup = worst_semigroup.max(semi);
        worst_increase = worst_increase.max(run.max_norm_increase());
        steps += run.steps;
        rows.push(json!({
            "z": vector_json(z),
            "value": vector_json(&run.value),
            "steps": run.steps,
            "rejected": run.rejected,
            "max_local_error": num(run.max_local_error),
            "max_norm_increase": num(run.max_norm_increase()),
            "semigroup_residual": num(semi),
        }));
    }
    let passed = worst_semigroup <= 1e-7 && worst_increase <= 10.0 * tol;
    let result = json!({
        "s": num(s),
        "t": num(t),
        "points": rows,
        "steps": steps,
        "residuals": {"semigroup": num(worst_semigroup), "max_norm_increase": num(worst_increase)},
    });
    let table = vec![
        ("points".into(), pts.len().to_string()),
        ("steps".into(), steps.to_string()),
        ("semigroup residual".into(), format!("{worst_semigroup:.3e}")),
        ("max norm increase".into(), format!("{worst_increase:.3e}")),
    ];
    Ok(Outcome { envelope: Envelope { command: "flow", config, seed: g.seed, passed, result }, table })
}

fn reach_cmd(g: &GlobalOpts, field_path: &std::path::Path, points: Option<&PathBuf>, pps: usize) -> Result<Outcome> {
    let radii = parse_radii(g.radii.as_deref())?;
    let tol = g.tol.unwrap_or(FlowOptions::default().tol);
    let config = Value::Object(field_echo(g, &radii, field_path, points, pps, tol));
    let fail = |result: Value| Outcome {
        envelope: Envelope { command: "reach", config: config.clone(), seed: g.seed, passed: false, result },
        table: vec![("status".into(), "criterion failure".into())],
    };
    let field = match load_field(g, field_path, &radii)? {
        Ok(f) => f,
        Err(v) => return Ok(fail(v)),
    };
    let opts = FlowOptions::with_tol(tol);
    let pts = flow_points(g, field.dim(), points, &radii, pps)?;
    let mut rows = Vec::with_capacity(pts.len());
    let mut worst_ratio: f64 = 0.0;
    for z in &pts {
        let w = match split(reachable_eval(&field, z, &opts))? {
            Ok(w) => w,
            Err(v) => return Ok(fail(v)),
        };
        let bound = reachable_growth_bound(&field, z);
        let ratio = norm(&w) / bound;
        worst_ratio = worst_ratio.max(ratio);
        rows.push(json!({"z": vector_json(z), "value": vector_json(&w), "norm": num(norm(&w)), "bound": num(bound)}));
    }
    let passed = worst_ratio <= 1.0;
    let (m, k) = field.range_extrema();
    let result = json!({
        "horizon": num(field.total_time()),
        "m": num(m),
        "k": num(k),
        "points": rows,
        "residuals": {"max_norm_over_bound": num(worst_ratio)},
    });
    let table = vec![
        ("points".into(), pts.len().to_string()),
        ("horizon".into(), format!("{}", field.total_time())),
        ("max |f(z)| / bound".into(), format!("{worst_ratio:.6}")),
    ];
    Ok(Outcome { envelope: Envelope { command: "reach", config, seed: g.seed, passed, result }, table })
}

fn run_json(run: &ApproximationRun) -> Value {
    let steps: Vec<Value> = run
        .steps
        .iter()
        .map(|s| {
            json!({
                "m": s.m,
                "r": num(s.r),
                "selection": s.selection.as_ref().map(|x| json!({
                    "index": x.index,
                    "margin": num(x.margin),
                    "screen": num(x.screen),
                    "threshold": num(x.threshold),
                    "report": criterion_report_json(&x.report),
                })),
                "failure": s.failure,
                "distances": s.distances.iter().map(|d| json!({
                    "rho": num(d.rho),
                    "distance": num(d.distance),
                    "coefficient_bound": num(d.coefficient_bound),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "criterion": run.criterion.criterion().as_str(),
        "target_report": criterion_report_json(&run.target_report),
        "selected": run.selected_indices(),
        "steps": steps,
    })
}

fn parse_schedule(spec: &str) -> Result<DilationSchedule> {
    if spec == "default" {
        return Ok(DilationSchedule::default());
    }
    if let Some(n) = spec.strip_prefix("geometric:") {
        return Ok(DilationSchedule::geometric(n.trim().parse().context("bad schedule length")?));
    }
    Ok(DilationSchedule::new(parse_list(spec)?)?)
}

#[allow(clippy::too_many_arguments)]
fn approx_cmd(
    g: &GlobalOpts,
    target: &std::path::Path,
    candidates: &std::path::Path,
    criterion: &str,
    operator: Option<&PathBuf>,
    region: &str,
    schedule: &str,
    test_radii: Option<&str>,
) -> Result<Outcome> {
    let f = read_map(target)?;
    let words = read_json::<CandidatesDto>(candidates)?.parse()?;
    let radii = parse_radii(g.radii.as_deref())?;
    let per_sphere = g.per_sphere.unwrap_or(100);
    let sched = parse_schedule(schedule)?;
    let test_radii = match test_radii {
        Some(s) => parse_list(s)?,
        None => DEFAULT_TEST_RADII.to_vec(),
    };
    let mut config = global_echo(g, &radii);
    config.insert("target".into(), json!(path_str(target)));
    config.insert("candidates".into(), json!(path_str(candidates)));
    config.insert("criterion".into(), json!(criterion));
    config.insert("operator".into(), json!(operator.map(|p| path_str(p))));
    config.insert("region".into(), json!(region));
    config.insert("schedule".into(), json!(sched.radii()));
    config.insert("test_radii".into(), json!(test_radii));
    config.insert("per_sphere".into(), json!(per_sphere));
    let config = Value::Object(config);

    let spec = match parse_criterion(criterion, operator, region)? {
        Selected::Spec(s) => s,
        _ => bail!("criterion {criterion} is not available for approximation"),
    };
    let sample = make_sample(f.dim(), &radii, per_sphere, 2, g.seed)?;
    let mut cfg = SelectionConfig::new(sample);
    cfg.norm_budget.seed = g.seed;
    let (passed, result, table) = match split(run_approximation(&f, &words, &spec, &sched, &test_radii, &cfg))? {
        Ok(run) => {
            let all = run.steps.iter().all(|s| s.selection.is_some());
            let mut table: Vec<(String, String)> = vec![("criterion".into(), criterion.into())];
            for s in &run.steps {
                let sel = s.selection.as_ref().map(|x| format!("k={} margin={:.6}", x.index, x.margin));
                let d = s.distances.iter().map(|d| format!("{:.3e}", d.distance)).collect::<Vec<_>>().join(" ");
                table.push((
                    format!("m={} r={:.6}", s.m, s.r),
                    format!("{} {d}", sel.unwrap_or_else(|| s.failure.clone().unwrap_or_default())),
                ));
            }
            (all, run_json(&run), table)
        }
        Err(v) => (false, v, vec![("status".into(), "criterion failure".into())]),
    };
    Ok(Outcome { envelope: Envelope { command: "approx", config, seed: g.seed, passed, result }, table })
}

fn suite_cmd(g: &GlobalOpts, builtin: &str) -> Result<Outcome> {
    if builtin != BUILTIN_SUITE {
        bail!("unknown built-in suite {builtin:?}; available: {BUILTIN_SUITE}");
    }
    let cfg = SuiteConfig { seed: g.seed };
    let outcomes = suite::run_all(&cfg);
    let passed = outcomes.iter().all(|o| o.passed);
    let table = outcomes
        .iter()
        .map(|o| (format!("{:>2} {}", o.id, o.name), o.line()))
        .collect();
    let result = json!({
        "builtin": builtin,
        "checks": outcomes.iter().map(|o| o.to_json()).collect::<Vec<_>>(),
        "passed": outcomes.iter().filter(|o| o.passed).count(),
        "total": outcomes.len(),
    });
    let config = json!({"builtin": builtin, "seed": g.seed});
    Ok(Outcome { envelope: Envelope { command: "suite", config, seed: g.seed, passed, result }, table })
}

/// Runs the parsed command line; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    if let Some(jobs) = cli.global.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    let start = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let wall = start.elapsed().as_secs_f64();
    print!("{}", table(&outcome.table));
    println!("status: {}", if outcome.envelope.passed { "pass" } else { "fail" });
    if let Some(out) = &cli.global.out {
        if let Err(e) = outcome.envelope.write(out, wall) {
            eprintln!("error: {e:#}");
            return 2;
        }
    }
    if outcome.envelope.passed {
        0
    } else {
        1
    }
}
