//! Loewner flows `dv/dt = -h(v, t)`, `v(z, s, s) = z`, for piecewise-constant
//! Herglotz fields, and the quantities built from them.
//!
//! Each piece is autonomous, so the integrator restarts at every piece
//! boundary; boundaries are always step endpoints. Steps are classical RK4
//! with step doubling: the difference of one full step and two half steps,
//! divided by 15, estimates the local error, and the accepted value is the
//! Richardson-extrapolated one.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::automorphism::AutomorphismWord;
use crate::criteria::{spirallike_test, CriterionReport};
use crate::linalg::{distance, norm};
use crate::operator::{expm, numerical_range_extrema, Operator};
use crate::polymap::PolyMap;
use crate::sample::{make_sample, BallSample, DEFAULT_RADII};
use crate::{Error, Result, C64};

/// Seed of the validation sample used when none is supplied.
pub const VALIDATION_SEED: u64 = 0x4c6f_6577;
/// Points per sphere in the default validation sample.
pub const VALIDATION_PER_SPHERE: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `h(z) = A z`.
    Linear,
    /// `h(z) = Df(z)^{-1} A f(z)` for a spirallike `f`.
    Spirallike(PolyMap),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub duration: f64,
    pub generator: Generator,
}

impl Piece {
    pub fn linear(duration: f64) -> Self {
        Piece { duration, generator: Generator::Linear }
    }

    pub fn spirallike(duration: f64, f: PolyMap) -> Self {
        Piece { duration, generator: Generator::Spirallike(f) }
    }
}

/// Piecewise-constant Herglotz field on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzField {
    a: Operator,
    pieces: Vec<Piece>,
    /// `starts[i]` is the start time of piece `i`; `starts[len]` is `T`.
    starts: Vec<f64>,
    m: f64,
    k: f64,
}

impl HerglotzField {
    /// Validates spirallike pieces against the default sample.
    pub fn new(a: Operator, pieces: Vec<Piece>) -> Result<Self> {
        let s = make_sample(a.dim(), &DEFAULT_RADII, VALIDATION_PER_SPHERE, 0, VALIDATION_SEED)?;
        Self::with_sample(a, pieces, &s)
    }

    pub fn with_sample(a: Operator, pieces: Vec<Piece>, sample: &BallSample) -> Result<Self> {
        let (m, k) = numerical_range_extrema(&a);
        if !(m > 0.0) {
            return Err(Error::precondition("Herglotz fields need m(A) > 0"));
        }
        if pieces.is_empty() {
            return Err(Error::invalid("field needs at least one piece"));
        }
        let mut starts = Vec::with_capacity(pieces.len() + 1);
        let mut t = 0.0;
        for (i, p) in pieces.iter().enumerate() {
            if !(p.duration > 0.0 && p.duration.is_finite()) {
                return Err(Error::invalid(format!("piece {i} has a non-positive duration")));
            }
            if let Generator::Spirallike(f) = &p.generator {
                Error::check_dim(a.dim(), f.dim())?;
                let rep = spirallike_test(f, &a, sample)?;
                if !rep.is_ok() {
                    return Err(Error::SpirallikeRejected { piece: i, report: Box::new(rep) });
                }
            }
            starts.push(t);
            t += p.duration;
        }
        starts.push(t);
        Ok(HerglotzField { a, pieces, starts, m, k })
    }

    pub fn linear(a: Operator, duration: f64) -> Result<Self> {
        Self::new(a, alloc::vec![Piece::linear(duration)])
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.a
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total_time(&self) -> f64 {
        self.starts[self.pieces.len()]
    }

    /// `(m(A), k(A))`.
    pub fn range_extrema(&self) -> (f64, f64) {
        (self.m, self.k)
    }

    /// `h(z)` on piece `i`.
    pub fn value(&self, piece: usize, z: &[C64]) -> Result<Vec<C64>> {
        match &self.pieces[piece].generator {
            Generator::Linear => Ok(self.a.apply(z)),
            Generator::Spirallike(f) => {
                let w = f.eval(z)?;
                f.jacobian_solve(z, &self.a.apply(&w))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// Initial step as a fraction of the piece duration.
    pub initial_fraction: f64,
    pub record_trajectory: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { tol: 1e-10, max_steps: 1_000_000, initial_fraction: 1.0 / 64.0, record_trajectory: false }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        FlowOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: Vec<C64>,
    pub steps: usize,
    pub rejected: usize,
    pub max_local_error: f64,
    /// `(t, ||v||)` after every accepted step, when requested.
    pub trajectory: Vec<(f64, f64)>,
}

impl FlowResult {
    /// Largest increase of `||v||` between consecutive recorded steps.
    pub fn max_norm_increase(&self) -> f64 {
        self.trajectory.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max)
    }
}

fn rk4(field: &HerglotzField, piece: usize, y: &[C64], k1: &[C64], h: f64) -> Result<Vec<C64>> {
    let rhs = |p: &[C64]| -> Result<Vec<C64>> { Ok(field.value(piece, p)?.into_iter().map(|x| -x).collect()) };
    let shift = |base: &[C64], k: &[C64], c: f64| -> Vec<C64> { base.iter().zip(k).map(|(a, b)| a + b * c).collect() };
    let k2 = rhs(&shift(y, k1, h / 2.0))?;
    let k3 = rhs(&shift(y, &k2, h / 2.0))?;
    let k4 = rhs(&shift(y, &k3, h))?;
    Ok((0..y.len()).map(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)).collect())
}

fn wrap_failure(e: Error, t: f64, point: &[C64]) -> Error {
    match e {
        Error::SingularJacobian { min_pivot } => Error::IntegrationFailure {
            t,
            point: point.to_vec(),
            reason: format!("singular Jacobian in the generator (pivot {min_pivot:.3e})"),
        },
        other => other,
    }
}

/// Integrates `dv/dt = -h(v)` on piece `piece` from `t0` to `t1`.
fn integrate_piece(
    field: &HerglotzField,
    piece: usize,
    y0: Vec<C64>,
    t0: f64,
    t1: f64,
    opts: &FlowOptions,
    out: &mut FlowResult,
) -> Result<Vec<C64>> {
    let mut y = y0;
    let mut t = t0;
    let mut h = (field.pieces[piece].duration * opts.initial_fraction).min(t1 - t0);
    let tiny = 1e-14 * t1.abs().max(1.0);
    while t < t1 {
        if out.steps + out.rejected >= opts.max_steps {
            return Err(Error::NoConvergence(format!("step budget of {} exhausted at t = {t}", opts.max_steps)));
        }
        let last = t + h >= t1 - tiny;
        let step = if last { t1 - t } else { h };
        let k1: Vec<C64> = field.value(piece, &y).map_err(|e| wrap_failure(e, t, &y))?.into_iter().map(|x| -x).collect();
        let attempt = (|| -> Result<(Vec<C64>, Vec<C64>)> {
            let full = rk4(field, piece, &y, &k1, step)?;
            let mid = rk4(field, piece, &y, &k1, step / 2.0)?;
            let k1m: Vec<C64> = field.value(piece, &mid)?.into_iter().map(|x| -x).collect();
            let two = rk4(field, piece, &mid, &k1m, step / 2.0)?;
            Ok((full, two))
        })();
        let (full, two) = match attempt {
            Ok(v) => v,
            // A trial stage may leave the region where the generator is
            // defined; shrink before declaring failure.
            Err(Error::SingularJacobian { .. }) if step > tiny * 1e3 => {
                h = step / 4.0;
                out.rejected += 1;
                continue;
            }
            Err(e) => return Err(wrap_failure(e, t, &y)),
        };
        let err = distance(&two, &full) / 15.0;
        // Relative control: parametric limits amplify v(t) by e^{tA}.
        let allowed = opts.tol * norm(&y);
        if err <= allowed {
            let next: Vec<C64> = two.iter().zip(&full).map(|(a, b)| a + (a - b) / 15.0).collect();
            let before = norm(&y);
            let after = norm(&next);
            if after > before + 10.0 * opts.tol {
                return Err(Error::InvariantViolated(format!(
                    "norm increased from {before} to {after} at t = {}; generator is not in the Caratheodory class here",
                    t + step
                )));
            }
            out.steps += 1;
            out.max_local_error = out.max_local_error.max(err);
            y = next;
            t = if last { t1 } else { t + step };
            if opts.record_trajectory {
                out.trajectory.push((t, after));
            }
            let factor = if err > 0.0 { (0.9 * libm::pow(allowed / err, 0.2)).clamp(0.2, 2.0) } else { 2.0 };
            h = step * factor;
        } else {
            out.rejected += 1;
            let factor = if err.is_finite() { (0.9 * libm::pow(allowed / err, 0.2)).clamp(0.1, 0.5) } else { 0.1 };
            h = step * factor;
            if h < tiny {
                return Err(Error::ToleranceUnreachable { t });
            }
        }
    }
    Ok(y)
}

/// Transition map `v(z, s, t)`.
pub fn flow(field: &HerglotzField, z: &[C64], s: f64, t: f64, opts: &FlowOptions) -> Result<FlowResult> {
    Error::check_dim(field.dim(), z.len())?;
    if !(norm(z) < 1.0) {
        return Err(Error::invalid("initial point must lie in the open unit ball"));
    }
    let total = field.total_time();
    let slack = 1e-12 * total.max(1.0);
    if !(s >= 0.0 && s <= t && t <= total + slack) {
        return Err(Error::invalid(format!("need 0 <= s <= t <= T = {total}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let t = t.min(total);
    let mut out = FlowResult { value: Vec::new(), steps: 0, rejected: 0, max_local_error: 0.0, trajectory: Vec::new() };
    if opts.record_trajectory {
        out.trajectory.push((s, norm(z)));
    }
    let mut y = z.to_vec();
    for i in 0..field.pieces.len() {
        let a = field.starts[i].max(s);
        let b = field.starts[i + 1].min(t);
        if a < b {
            y = integrate_piece(field, i, y, a, b, opts, &mut out)?;
        }
    }
    out.value = y;
    Ok(out)
}

/// `e^{TA} v(z, 0, T)`.
pub fn reachable_eval(field: &HerglotzField, z: &[C64], opts: &FlowOptions) -> Result<Vec<C64>> {
    let total = field.total_time();
    let v = flow(field, z, 0.0, total, opts)?;
    Ok(expm(field.a.matrix(), total)?.matvec(&v.value))
}

/// `e^{TA} ||z|| / (1 - ||z||)^2` growth bound for reachable elements, with
/// the exponent `T (k(A) - m(A))`.
pub fn reachable_growth_bound(field: &HerglotzField, z: &[C64]) -> f64 {
    let r = norm(z);
    libm::exp(field.total_time() * (field.k - field.m)) * r / ((1.0 - r) * (1.0 - r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParametricLimit {
    pub value: Vec<C64>,
    pub t: f64,
    pub converged: bool,
    /// `(t, e^{tA} v(z, 0, t))` at every probe.
    pub probes: Vec<(f64, Vec<C64>)>,
}

/// Probes `e^{tA} v(z, 0, t)` at `t = 1, 2, 4, ...` up to `t_max`, with the
/// field extended by `h(z) = Az` beyond `T` (the probe is then constant).
/// Stops once two successive probes differ by less than `tol`.
pub fn parametric_limit(field: &HerglotzField, z: &[C64], t_max: f64, tol: f64, opts: &FlowOptions) -> Result<ParametricLimit> {
    Error::check_dim(field.dim(), z.len())?;
    if !(t_max >= 1.0) {
        return Err(Error::invalid("t_max must be at least 1"));
    }
    let total = field.total_time();
    let mut probes: Vec<(f64, Vec<C64>)> = Vec::new();
    let mut state = z.to_vec();
    let mut t_state = 0.0;
    let mut t = 1.0f64;
    loop {
        let t_eval = t.min(t_max);
        let t_flow = t_eval.min(total);
        if t_flow > t_state {
            state = flow(field, &state, t_state, t_flow, opts)?.value;
            t_state = t_flow;
        }
        // Beyond T the linear extension gives e^{tA} v(t) = e^{TA} v(T).
        let value = expm(field.a.matrix(), t_flow)?.matvec(&state);
        let converged = probes.last().map(|(_, prev)| distance(prev, &value) < tol).unwrap_or(false);
        probes.push((t_eval, value.clone()));
        if converged || t_eval >= t_max {
            return Ok(ParametricLimit { value, t: t_eval, converged, probes });
        }
        t *= 2.0;
    }
}

/// `||v(z, s, u) - v(v(z, s, t), t, u)||`.
pub fn semigroup_check(field: &HerglotzField, z: &[C64], s: f64, t: f64, u: f64, opts: &FlowOptions) -> Result<f64> {
    if !(s <= t && t <= u) {
        return Err(Error::invalid("need s <= t <= u"));
    }
    let direct = flow(field, z, s, u, opts)?.value;
    let mid = flow(field, z, s, t, opts)?.value;
    let split = flow(field, &mid, t, u, opts)?.value;
    Ok(distance(&direct, &split))
}

/// `||f(v(z, 0, t)) - e^{-tA} f(z)||` for the field generated by `f` alone.
/// `f` is first checked for spirallikeness with respect to `A` on `sample`.
pub fn subordination_check(
    f: &PolyMap,
    a: &Operator,
    z: &[C64],
    t: f64,
    sample: &BallSample,
    opts: &FlowOptions,
) -> Result<f64> {
    let rep = spirallike_test(f, a, sample)?;
    if !rep.is_ok() {
        return Err(Error::SpirallikeRejected { piece: 0, report: Box::new(rep) });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let field = HerglotzField::with_sample(a.clone(), alloc::vec![Piece::spirallike(t, f.clone())], sample)?;
    let v = flow(&field, z, 0.0, t, opts)?.value;
    let lhs = f.eval(&v)?;
    let rhs = expm(a.matrix(), -t)?.matvec(&f.eval(z)?);
    Ok(distance(&lhs, &rhs))
}

/// Field with one piece per word; each word is normalized, and a word whose
/// map is the identity becomes a linear piece.
pub fn field_from_automorphisms(pieces: &[(f64, AutomorphismWord)], a: &Operator, sample: &BallSample) -> Result<HerglotzField> {
    let mut out = Vec::with_capacity(pieces.len());
    for (i, (duration, word)) in pieces.iter().enumerate() {
        Error::check_dim(a.dim(), word.dim())?;
        let f = word.normalize()?.to_polymap()?;
        if f == PolyMap::identity(a.dim()) {
            out.push(Piece::linear(*duration));
        } else {
            let rep = spirallike_test(&f, a, sample)?;
            if !rep.is_ok() {
                return Err(Error::SpirallikeRejected { piece: i, report: Box::new(rep) });
            }
            out.push(Piece::spirallike(*duration, f));
        }
    }
    HerglotzField::with_sample(a.clone(), out, sample)
}

/// Report attached to a spirallike rejection, if `e` is one.
pub fn rejection_report(e: &Error) -> Option<&CriterionReport> {
    match e {
        Error::SpirallikeRejected { report, .. } => Some(report),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::Factor;
    use crate::linalg::scale_real;
    use crate::polymap::{MultiIndex, Polynomial};
    use crate::sample::{random_unit_vector, seeded};
    use alloc::vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn shear(a: f64) -> PolyMap {
        PolyMap::new(vec![
            Polynomial::variable(2, 0).add(&Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(a))),
            Polynomial::variable(2, 1),
        ])
        .unwrap()
    }

    /// `f^{-1}(e^{-t} f(z))` for the shear.
    fn shear_flow(a: f64, z: &[C64], t: f64) -> Vec<C64> {
        let e = libm::exp(-t);
        let w = [(z[0] + z[1] * z[1] * a) * e, z[1] * e];
        vec![w[0] - w[1] * w[1] * a, w[1]]
    }

    #[test]
    fn identity_linear_flow() {
        let field = HerglotzField::linear(Operator::identity(2), 3.0).unwrap();
        let z = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4)];
        let v = flow(&field, &z, 0.0, 3.0, &FlowOptions::default()).unwrap();
        let exact = scale_real(&z, libm::exp(-3.0));
        assert!(distance(&v.value, &exact) < 1e-10);
        assert!(v.max_local_error <= 1e-10);
    }

    #[test]
    fn general_linear_flow() {
        let a = Operator::from_real_rows(&[&[1.0, 0.5], &[-0.3, 2.0]]).unwrap();
        let field = HerglotzField::linear(a.clone(), 5.0).unwrap();
        let mut rng = seeded(1);
        for _ in 0..10 {
            let z = scale_real(&random_unit_vector(&mut rng, 2), 0.9);
            let v = flow(&field, &z, 0.0, 5.0, &FlowOptions::default()).unwrap();
            let exact = expm(a.matrix(), -5.0).unwrap().matvec(&z);
            assert!(distance(&v.value, &exact) < 1e-9);
        }
    }

    #[test]
    fn shear_flow_closed_form() {
        let a = 0.3;
        let field = HerglotzField::new(Operator::identity(2), vec![Piece::spirallike(5.0, shear(a))]).unwrap();
        let mut rng = seeded(2);
        for _ in 0..10 {
            let z = scale_real(&random_unit_vector(&mut rng, 2), 0.5);
            let v = flow(&field, &z, 0.0, 5.0, &FlowOptions::default()).unwrap();
            assert!(distance(&v.value, &shear_flow(a, &z, 5.0)) < 1e-6);
        }
    }

    #[test]
    fn flow_rejects_bad_input() {
        let field = HerglotzField::linear(Operator::identity(2), 1.0).unwrap();
        let o = FlowOptions::default();
        assert!(flow(&field, &[c(1.0), c(0.0)], 0.0, 1.0, &o).is_err());
        assert!(flow(&field, &[c(0.1), c(0.0)], 0.5, 0.2, &o).is_err());
        assert!(flow(&field, &[c(0.1), c(0.0)], 0.0, 2.0, &o).is_err());
        assert!(flow(&field, &[c(0.1)], 0.0, 1.0, &o).is_err());
    }

    #[test]
    fn reachable_linear_is_identity() {
        let a = Operator::from_real_rows(&[&[1.0, 0.2], &[0.0, 1.5]]).unwrap();
        let field = HerglotzField::linear(a, 2.0).unwrap();
        let z = vec![C64::new(0.2, 0.3), c(-0.4)];
        let w = reachable_eval(&field, &z, &FlowOptions::default()).unwrap();
        assert!(distance(&w, &z) < 1e-9);
    }

    #[test]
    fn parametric_limit_examples() {
        let lin = HerglotzField::linear(Operator::identity(2), 1.0).unwrap();
        let z = vec![c(0.3), c(0.2)];
        let lim = parametric_limit(&lin, &z, 64.0, 1e-8, &FlowOptions::default()).unwrap();
        assert!(lim.converged && distance(&lim.value, &z) < 1e-9);

        let f = shear(0.3);
        let field = HerglotzField::new(Operator::identity(2), vec![Piece::spirallike(64.0, f.clone())]).unwrap();
        let lim = parametric_limit(&field, &z, 64.0, 1e-6, &FlowOptions::default()).unwrap();
        assert!(lim.converged);
        assert!(distance(&lim.value, &f.eval(&z).unwrap()) < 1e-4);
    }

    #[test]
    fn semigroup_and_subordination() {
        let f = shear(0.3);
        let a = Operator::identity(2);
        let field = HerglotzField::new(a.clone(), vec![Piece::spirallike(1.0, f.clone()), Piece::linear(1.0)]).unwrap();
        let z = vec![C64::new(0.2, 0.1), C64::new(0.3, -0.2)];
        let o = FlowOptions::default();
        assert!(semigroup_check(&field, &z, 0.0, 0.7, 2.0, &o).unwrap() < 1e-8);
        assert_eq!(semigroup_check(&field, &z, 0.5, 0.5, 0.5, &o).unwrap(), 0.0);
        let s = make_sample(2, &DEFAULT_RADII, 100, 0, 5).unwrap();
        assert!(subordination_check(&f, &a, &z, 1.0, &s, &o).unwrap() < 1e-8);
        assert!(subordination_check(&PolyMap::identity(2), &a, &z, 1.0, &s, &o).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_non_spirallike_pieces() {
        let s = make_sample(2, &DEFAULT_RADII, 200, 0, 5).unwrap();
        let a = Operator::identity(2);
        let bad = AutomorphismWord::new(2, vec![Factor::shear(0, Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(3.0)))]).unwrap();
        let err = field_from_automorphisms(&[(1.0, bad)], &a, &s).unwrap_err();
        assert!(rejection_report(&err).is_some());
        let good = AutomorphismWord::new(2, vec![Factor::shear(0, Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(0.3)))]).unwrap();
        let field = field_from_automorphisms(&[(1.0, good), (1.0, AutomorphismWord::identity(2))], &a, &s).unwrap();
        assert_eq!(field.pieces()[1].generator, Generator::Linear);
    }
}
