//! Resonance detection for spectra with positive real parts.
//!
//! `A` is resonant when some eigenvalue satisfies `lambda_s = sum m_j lambda_j`
//! with non-negative integers `m_j`, `sum m_j >= 2`. When every `Re lambda_j > 0`
//! the search is finite: a resonance forces
//! `Re lambda_s = sum m_j Re lambda_j >= (sum m_j) * min_j Re lambda_j`,
//! so `sum m_j <= k_+ / min_j Re lambda_j`.

use alloc::format;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::polymap::MultiIndex;
use crate::{Error, Result, C64};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Upper limit on the number of multi-indices the search may visit.
pub const MAX_ENUMERATION: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    Nonresonant,
    /// Exact relation between exactly represented eigenvalues.
    Resonant,
    /// Relation holding to the relative tolerance on floating-point eigenvalues.
    ResonantWithinTolerance,
}

impl ResonanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResonanceKind::Nonresonant => "nonresonant",
            ResonanceKind::Resonant => "resonant",
            ResonanceKind::ResonantWithinTolerance => "resonant-within-tolerance",
        }
    }
}

/// `lambda_index = sum multi_index[j] * lambda_j` (zero-based `index`).
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceWitness {
    pub index: usize,
    pub multi_index: MultiIndex,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceVerdict {
    pub kind: ResonanceKind,
    pub witness: Option<ResonanceWitness>,
    pub real_resonant: bool,
    pub real_witness: Option<ResonanceWitness>,
    /// Largest `sum m_j` enumerated.
    pub search_bound: u32,
}

impl ResonanceVerdict {
    pub fn is_resonant(&self) -> bool {
        self.kind != ResonanceKind::Nonresonant
    }
}

fn search_bound_from(kplus_over_kmin: f64) -> Result<u32> {
    let b = libm::floor(kplus_over_kmin) + 1.0;
    if !(b.is_finite() && b < u32::MAX as f64) {
        return Err(Error::Unsupported("resonance search bound is not finite".into()));
    }
    Ok((b as u32).max(2))
}

fn check_enumeration(n: usize, bound: u32) -> Result<()> {
    let total: u64 = (2..=bound).map(|d| MultiIndex::count_of_degree(n, d)).fold(0u64, |a, c| a.saturating_add(c));
    if total > MAX_ENUMERATION {
        return Err(Error::Unsupported(format!(
            "resonance search would visit {total} multi-indices (limit {MAX_ENUMERATION})"
        )));
    }
    Ok(())
}

/// Floating-point resonance search with relative tolerance `tol`:
/// `|lambda_s - sum m_j lambda_j| <= tol * (1 + |lambda_s|)`.
pub fn detect_resonance(eigenvalues: &[C64], tol: f64) -> Result<ResonanceVerdict> {
    if eigenvalues.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    if let Some(bad) = eigenvalues.iter().find(|l| !(l.re > 0.0)) {
        return Err(Error::precondition(format!(
            "resonance search needs Re(lambda) > 0 for every eigenvalue, found {bad}"
        )));
    }
    let n = eigenvalues.len();
    let kmin = eigenvalues.iter().map(|l| l.re).fold(f64::INFINITY, f64::min);
    let kplus = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let bound = search_bound_from(kplus / kmin)?;
    check_enumeration(n, bound)?;

    let mut witness = None;
    let mut real_witness = None;
    'outer: for d in 2..=bound {
        for mi in MultiIndex::all_of_degree(n, d) {
            let combo: C64 = mi.exponents().iter().zip(eigenvalues).map(|(&m, l)| l * m as f64).sum();
            for (s, ls) in eigenvalues.iter().enumerate() {
                let scale = 1.0 + ls.norm();
                if witness.is_none() {
                    let r = (ls - combo).norm();
                    if r <= tol * scale {
                        witness = Some(ResonanceWitness { index: s, multi_index: mi.clone(), residual: r });
                    }
                }
                if real_witness.is_none() {
                    let r = (ls.re - combo.re).abs();
                    if r <= tol * scale {
                        real_witness = Some(ResonanceWitness { index: s, multi_index: mi.clone(), residual: r });
                    }
                }
            }
            if witness.is_some() && real_witness.is_some() {
                break 'outer;
            }
        }
    }
    Ok(ResonanceVerdict {
        kind: if witness.is_some() { ResonanceKind::ResonantWithinTolerance } else { ResonanceKind::Nonresonant },
        witness,
        real_resonant: real_witness.is_some(),
        real_witness,
        search_bound: bound,
    })
}

/// A Gaussian rational `re + i im`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        GaussianRational { re: BigRational::from_integer(re.into()), im: BigRational::from_integer(im.into()) }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// Exact resonance search on Gaussian-rational eigenvalues.
pub fn detect_resonance_exact(eigenvalues: &[GaussianRational]) -> Result<ResonanceVerdict> {
    if eigenvalues.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let zero = BigRational::zero();
    if eigenvalues.iter().any(|l| l.re <= zero) {
        return Err(Error::precondition("resonance search needs Re(lambda) > 0 for every eigenvalue"));
    }
    let n = eigenvalues.len();
    let kmin = eigenvalues.iter().map(|l| &l.re).min().unwrap().clone();
    let kplus = eigenvalues.iter().map(|l| &l.re).max().unwrap().clone();
    let ratio = kplus / kmin;
    let floor: BigInt = ratio.numer().div_floor(ratio.denom());
    let bound = floor
        .to_u32()
        .and_then(|b| b.checked_add(1))
        .ok_or_else(|| Error::Unsupported("resonance search bound too large".into()))?
        .max(2);
    check_enumeration(n, bound)?;

    let mut witness = None;
    let mut real_witness = None;
    'outer: for d in 2..=bound {
        for mi in MultiIndex::all_of_degree(n, d) {
            let mut re = BigRational::zero();
            let mut im = BigRational::zero();
            for (&m, l) in mi.exponents().iter().zip(eigenvalues) {
                if m > 0 {
                    let mm = BigRational::from_integer(m.into());
                    re += &l.re * &mm;
                    im += &l.im * &mm;
                }
            }
            for (s, ls) in eigenvalues.iter().enumerate() {
                if witness.is_none() && ls.re == re && ls.im == im {
                    witness = Some(ResonanceWitness { index: s, multi_index: mi.clone(), residual: 0.0 });
                }
                if real_witness.is_none() && ls.re == re {
                    real_witness = Some(ResonanceWitness { index: s, multi_index: mi.clone(), residual: 0.0 });
                }
            }
            if witness.is_some() && real_witness.is_some() {
                break 'outer;
            }
        }
    }
    Ok(ResonanceVerdict {
        kind: if witness.is_some() { ResonanceKind::Resonant } else { ResonanceKind::Nonresonant },
        witness,
        real_resonant: real_witness.is_some(),
        real_witness,
        search_bound: bound,
    })
}

/// Consistency of a real-resonance verdict with the operator's numerical range.
///
/// When `k_+ <= 2m`, a real resonance forces `k_+ = 2 k_- = 2m`, and
/// conversely `k_+ = 2 k_-` produces one (take `lambda_s` with the largest and
/// `lambda_j` with the smallest real part, `m_j = 2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealResonanceCheck {
    /// `k_+ <= 2m` holds (within `tol`), so the characterization applies.
    pub applicable: bool,
    pub kplus_equals_twice_m: bool,
    pub kplus_equals_twice_kminus: bool,
    pub consistent: bool,
}

pub fn real_resonance_check(m: f64, kminus: f64, kplus: f64, real_resonant: bool, tol: f64) -> RealResonanceCheck {
    let scale = 1.0 + kplus.abs();
    let applicable = kplus <= 2.0 * m + tol * scale;
    let kplus_equals_twice_m = (kplus - 2.0 * m).abs() <= tol * scale;
    let kplus_equals_twice_kminus = (kplus - 2.0 * kminus).abs() <= tol * scale;
    let consistent = !applicable
        || (real_resonant == kplus_equals_twice_kminus && (!real_resonant || kplus_equals_twice_m));
    RealResonanceCheck { applicable, kplus_equals_twice_m, kplus_equals_twice_kminus, consistent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn diag_one_two_point_five_is_nonresonant() {
        let v = detect_resonance(&[re(1.0), re(2.5)], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.kind, ResonanceKind::Nonresonant);
        assert!(!v.real_resonant);
        assert_eq!(v.search_bound, 3);
    }

    #[test]
    fn one_two_is_resonant_with_witness() {
        let v = detect_resonance(&[re(1.0), re(2.0)], DEFAULT_TOLERANCE).unwrap();
        assert!(v.is_resonant());
        let w = v.witness.unwrap();
        assert_eq!(w.index, 1);
        assert_eq!(w.multi_index.exponents(), &[2, 0]);
    }

    #[test]
    fn ex3r_spectrum_is_nonresonant() {
        let alpha = (1.0 - libm::sqrt(5.0)) / 4.0;
        let v = detect_resonance(&[re(1.0 - 2.0 * alpha), re(0.5 - 2.0 * alpha)], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.kind, ResonanceKind::Nonresonant);
        assert!(!v.real_resonant);
    }

    #[test]
    fn non_positive_real_part_rejected() {
        assert!(matches!(
            detect_resonance(&[re(1.0), re(0.0)], DEFAULT_TOLERANCE),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn complex_pair_is_real_resonant_only() {
        // lambda = (1 + i, 2 + 5i): 2 * Re(l1) = Re(l2) but 2 * l1 != l2.
        let v = detect_resonance(&[C64::new(1.0, 1.0), C64::new(2.0, 5.0)], DEFAULT_TOLERANCE).unwrap();
        assert_eq!(v.kind, ResonanceKind::Nonresonant);
        assert!(v.real_resonant);
    }

    #[test]
    fn exact_mode_reports_exact_resonance() {
        let half = GaussianRational::new(BigRational::new(1.into(), 2.into()), BigRational::zero());
        let three_halves = GaussianRational::new(BigRational::new(3.into(), 2.into()), BigRational::zero());
        let v = detect_resonance_exact(&[half, three_halves]).unwrap();
        assert_eq!(v.kind, ResonanceKind::Resonant);
        assert_eq!(v.witness.unwrap().multi_index.exponents(), &[3, 0]);

        let v = detect_resonance_exact(&[GaussianRational::from_integers(2, 0), GaussianRational::from_integers(5, 0)])
            .unwrap();
        assert_eq!(v.kind, ResonanceKind::Nonresonant);
    }

    #[test]
    fn enumeration_cap() {
        let eig = vec![re(1e-3), re(1.0), re(1.0), re(1.0), re(1.0), re(1.0)];
        assert!(matches!(detect_resonance(&eig, DEFAULT_TOLERANCE), Err(Error::Unsupported(_))));
    }

    #[test]
    fn real_resonance_check_on_ex3r() {
        // m = (1 + sqrt5)/4, k_- = sqrt5/2, k_+ = (1 + sqrt5)/2: k_+ = 2m but no real resonance.
        let s5 = libm::sqrt(5.0);
        let c = real_resonance_check((1.0 + s5) / 4.0, s5 / 2.0, (1.0 + s5) / 2.0, false, 1e-9);
        assert!(c.applicable && c.kplus_equals_twice_m && !c.kplus_equals_twice_kminus && c.consistent);
        // Hermitian diag(1, 2): k_+ = 2m = 2k_-, resonant.
        let c = real_resonance_check(1.0, 1.0, 2.0, true, 1e-9);
        assert!(c.consistent);
        let c = real_resonance_check(1.0, 1.0, 2.0, false, 1e-9);
        assert!(!c.consistent);
    }
}
