//! Scalar invariants of a linear operator `A` on `C^n`.
//!
//! * `m(A)`, `k(A)`: extreme values of `Re <Az, z>` on the unit sphere, which are
//!   the extreme eigenvalues of the Hermitian part `(A + A*) / 2`.
//! * `|V(A)|`: numerical radius, `max_theta lambda_max(Re(e^{i theta} A))`.
//! * `k_+(A)`, `k_-(A)`: largest and smallest real part of the spectrum.
//!
//! They satisfy `m <= k_- <= k_+ <= |V| <= ||A|| <= 2 |V|`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::linalg::{self, hermitian_eigenvalues, Matrix};
use crate::{Error, Result, C64};

/// Absolute slack for the operator inequality chain.
pub const TAU_LIN: f64 = 1e-9;
/// Largest dimension accepted by the spectral routines.
pub const MAX_DIM: usize = 8;
pub const DEFAULT_ANGLE_GRID: usize = 720;

/// A validated `n x n` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: Matrix,
}

impl Operator {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::invalid("operator dimension must be at least 1"));
        }
        if !matrix.is_finite() {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        Ok(Operator { matrix })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(Matrix::from_real_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Operator { matrix: Matrix::identity(n) }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::new(Matrix::diagonal(&d))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        self.matrix.matvec(z)
    }

    fn check_cap(&self) -> Result<()> {
        if self.dim() > MAX_DIM {
            Err(Error::Unsupported(format!("dimension {} exceeds cap {}", self.dim(), MAX_DIM)))
        } else {
            Ok(())
        }
    }
}

/// `(m(A), k(A))`.
pub fn numerical_range_extrema(a: &Operator) -> (f64, f64) {
    let eig = hermitian_eigenvalues(&a.matrix.hermitian_part());
    (eig[0], eig[eig.len() - 1])
}

fn rotated_top(a: &Matrix, theta: f64) -> f64 {
    let rot = a.scaled(C64::from_polar(1.0, theta)).hermitian_part();
    *hermitian_eigenvalues(&rot).last().unwrap()
}

/// Numerical radius by an angle grid plus golden-section refinement of the
/// best local maxima.
pub fn numerical_radius(a: &Operator, angle_grid: usize, tol: f64) -> Result<f64> {
    if angle_grid < 8 {
        return Err(Error::precondition("angle grid must have at least 8 points"));
    }
    let m = &a.matrix;
    let step = 2.0 * PI / angle_grid as f64;
    let values: Vec<f64> = (0..angle_grid).map(|i| rotated_top(m, i as f64 * step)).collect();
    let mut peaks: Vec<usize> = (0..angle_grid)
        .filter(|&i| {
            let prev = values[(i + angle_grid - 1) % angle_grid];
            let next = values[(i + 1) % angle_grid];
            values[i] >= prev && values[i] >= next
        })
        .collect();
    peaks.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    peaks.truncate(4);

    let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    for &p in &peaks {
        let centre = p as f64 * step;
        let (mut lo, mut hi) = (centre - step, centre + step);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = rotated_top(m, x1);
        let mut f2 = rotated_top(m, x2);
        let tol_theta = tol.clamp(1e-15, 1e-6);
        let mut guard = 0;
        while hi - lo > tol_theta && guard < 200 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = rotated_top(m, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = rotated_top(m, x1);
            }
            guard += 1;
        }
        best = best.max(f1).max(f2);
    }
    Ok(best)
}

/// Spectral abscissa with a consistency check against `log ||e^{tA}|| / t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAbscissa {
    pub kplus: f64,
    pub kminus: f64,
    pub eigenvalues: Vec<C64>,
    /// Estimate of `lim log ||e^{tA}|| / t` at `t = 2^20`.
    pub limit_estimate: f64,
}

const LIMIT_HORIZON_DOUBLINGS: u32 = 20;
const LIMIT_TOLERANCE: f64 = 1e-3;

pub fn spectral_abscissa(a: &Operator) -> Result<SpectralAbscissa> {
    a.check_cap()?;
    let eigenvalues = linalg::eigenvalues(&a.matrix)?;
    let kplus = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let kminus = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let limit_estimate = growth_rate_estimate(a, kplus)?;
    if (limit_estimate - kplus).abs() > LIMIT_TOLERANCE * kplus.abs().max(1.0) {
        return Err(Error::InvariantViolated(format!(
            "spectral abscissa {kplus} disagrees with growth rate {limit_estimate}"
        )));
    }
    Ok(SpectralAbscissa { kplus, kminus, eigenvalues, limit_estimate })
}

/// `log ||e^{TA}|| / T` for `T = 2^20`, computed as
/// `shift + log ||e^{T(A - shift I)}|| / T` with renormalized repeated squaring.
fn growth_rate_estimate(a: &Operator, shift: f64) -> Result<f64> {
    let n = a.dim();
    let shifted = a.matrix.sub(&Matrix::identity(n).scaled(C64::new(shift, 0.0)));
    let mut m = expm(&shifted, 1.0)?;
    let mut log_scale = 0.0;
    let nrm = m.norm_spectral();
    if nrm == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    m = m.scaled(C64::new(1.0 / nrm, 0.0));
    log_scale += libm::log(nrm);
    for _ in 0..LIMIT_HORIZON_DOUBLINGS {
        m = m.mul(&m);
        log_scale *= 2.0;
        let nrm = m.norm_spectral();
        if nrm == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        m = m.scaled(C64::new(1.0 / nrm, 0.0));
        log_scale += libm::log(nrm);
    }
    let horizon = libm::ldexp(1.0, LIMIT_HORIZON_DOUBLINGS as i32);
    Ok(shift + log_scale / horizon)
}

/// `e^{tA}`.
pub fn matrix_exp(a: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::invalid("time must be finite"));
    }
    Ok(Operator { matrix: expm(&a.matrix, t)? })
}

/// Scaling and squaring with a truncated Taylor series.
pub(crate) fn expm(a: &Matrix, t: f64) -> Result<Matrix> {
    let n = a.dim();
    if t == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let ta = a.scaled(C64::new(t, 0.0));
    let nrm = ta.norm_one();
    if !nrm.is_finite() {
        return Err(Error::Range("t * A is not finite".into()));
    }
    let squarings = if nrm > 0.5 { libm::ceil(libm::log2(nrm / 0.5)) as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::Range(format!("||tA|| = {nrm:e} too large")));
    }
    let b = ta.scaled(C64::new(libm::ldexp(1.0, -squarings), 0.0));
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=30 {
        term = term.mul(&b).scaled(C64::new(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
        if term.norm_one() <= f64::EPSILON * 1e-3 * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    if !sum.is_finite() {
        return Err(Error::Range(format!("e^(tA) overflows for t = {t}")));
    }
    Ok(sum)
}

/// All scalar invariants of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorProfile {
    pub dim: usize,
    pub m: f64,
    pub k: f64,
    pub kminus: f64,
    pub kplus: f64,
    pub vr: f64,
    pub opnorm: f64,
    pub eigenvalues: Vec<C64>,
    pub limit_estimate: f64,
}

impl OperatorProfile {
    /// Worst violation of the inequality chain (non-positive when it holds).
    pub fn chain_violation(&self) -> f64 {
        [
            self.m - self.kminus,
            self.kminus - self.kplus,
            self.kplus - self.vr,
            self.vr - self.opnorm,
            self.opnorm - 2.0 * self.vr,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn operator_profile(a: &Operator) -> Result<OperatorProfile> {
    a.check_cap()?;
    let (m, k) = numerical_range_extrema(a);
    let spec = spectral_abscissa(a)?;
    let vr = numerical_radius(a, DEFAULT_ANGLE_GRID, 1e-12)?;
    let opnorm = a.matrix.norm_spectral();
    let profile = OperatorProfile {
        dim: a.dim(),
        m,
        k,
        kminus: spec.kminus,
        kplus: spec.kplus,
        vr,
        opnorm,
        eigenvalues: spec.eigenvalues,
        limit_estimate: spec.limit_estimate,
    };
    let violation = profile.chain_violation();
    if violation > TAU_LIN {
        return Err(Error::InvariantViolated(format!(
            "operator inequality chain violated by {violation:e}"
        )));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex3r() -> Operator {
        let alpha = (1.0 - libm::sqrt(5.0)) / 4.0;
        Operator::from_real_rows(&[&[1.0 - 2.0 * alpha, 1.0], &[0.0, 0.5 - 2.0 * alpha]]).unwrap()
    }

    #[test]
    fn identity_extrema() {
        assert_eq!(numerical_range_extrema(&Operator::identity(2)), (1.0, 1.0));
    }

    #[test]
    fn ex3r_m_matches_closed_form() {
        let (m, _) = numerical_range_extrema(&ex3r());
        assert!((m - (1.0 + libm::sqrt(5.0)) / 4.0).abs() < 1e-12);
        assert!((m - 0.8090169944).abs() < 1e-10);
    }

    #[test]
    fn spec_literal_matrix_gives_same_m() {
        let a = Operator::from_real_rows(&[&[1.6180339887, 1.0], &[0.0, 1.1180339887]]).unwrap();
        let (m, _) = numerical_range_extrema(&a);
        assert!((m - 0.8090169944).abs() < 1e-9);
    }

    #[test]
    fn diagonal_extrema() {
        let a = Operator::diagonal(&[1.0, 2.5]).unwrap();
        assert_eq!(numerical_range_extrema(&a), (1.0, 2.5));
    }

    #[test]
    fn numerical_radius_examples() {
        let vr = |a: &Operator| numerical_radius(a, DEFAULT_ANGLE_GRID, 1e-12).unwrap();
        assert!((vr(&Operator::identity(2)) - 1.0).abs() < 1e-12);
        assert!((vr(&Operator::diagonal(&[1.0, 2.5]).unwrap()) - 2.5).abs() < 1e-12);
        let nil = Operator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((vr(&nil) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn numerical_radius_rejects_small_grid() {
        assert!(numerical_radius(&Operator::identity(2), 4, 1e-9).is_err());
    }

    #[test]
    fn ex3r_spectral_abscissa() {
        let s = spectral_abscissa(&ex3r()).unwrap();
        let golden = (1.0 + libm::sqrt(5.0)) / 2.0;
        assert!((s.kplus - golden).abs() < 1e-12);
        let (m, _) = numerical_range_extrema(&ex3r());
        assert!((s.kplus - 2.0 * m).abs() < 1e-9);
        assert!((s.limit_estimate - s.kplus).abs() < 1e-3);
    }

    #[test]
    fn identity_abscissa() {
        let s = spectral_abscissa(&Operator::identity(2)).unwrap();
        assert_eq!((s.kplus, s.kminus), (1.0, 1.0));
    }

    #[test]
    fn abscissa_dimension_cap() {
        let big = Operator::identity(9);
        assert!(matches!(spectral_abscissa(&big), Err(Error::Unsupported(_))));
    }

    #[test]
    fn expm_zero_and_diagonal() {
        let a = ex3r();
        let e0 = matrix_exp(&a, 0.0).unwrap();
        assert_eq!(e0.matrix(), &Matrix::identity(2));
        let d = Operator::diagonal(&[1.0, 2.0]).unwrap();
        let e = matrix_exp(&d, 1.0).unwrap();
        let e1 = core::f64::consts::E;
        assert!((e.matrix()[(0, 0)].re - e1).abs() < 1e-14 * e1);
        assert!((e.matrix()[(1, 1)].re - e1 * e1).abs() < 1e-13 * e1 * e1);
        assert_eq!(e.matrix()[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn expm_jordan_block_closed_form() {
        // e^{t [[l, 1], [0, l]]} = e^{lt} [[1, t], [0, 1]]
        let a = Operator::from_real_rows(&[&[0.3, 1.0], &[0.0, 0.3]]).unwrap();
        for t in [0.5, 3.0, 20.0] {
            let e = matrix_exp(&a, t).unwrap();
            let s = libm::exp(0.3 * t);
            assert!((e.matrix()[(0, 0)].re - s).abs() < 1e-12 * s);
            assert!((e.matrix()[(0, 1)].re - s * t).abs() < 1e-12 * s * t);
        }
    }

    #[test]
    fn expm_overflow_is_range_error() {
        let a = Operator::identity(2);
        assert!(matches!(matrix_exp(&a, 1e6), Err(Error::Range(_))));
    }

    #[test]
    fn identity_profile() {
        let p = operator_profile(&Operator::identity(2)).unwrap();
        for v in [p.m, p.k, p.vr, p.kplus, p.opnorm] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_entries_rejected() {
        let m = Matrix::from_real_rows(&[&[f64::NAN, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(Operator::new(m), Err(Error::InvalidInput(_))));
    }
}
