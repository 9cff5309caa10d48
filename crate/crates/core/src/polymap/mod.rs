//! Sparse polynomial maps `C^n -> C^n`.
//!
//! Coefficients are keyed by [`MultiIndex`]; exact zeros produced by addition
//! or composition are pruned so shear/inverse-shear cancellations give back
//! the identity map coefficient for coefficient.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Lu, Matrix};
use crate::{Error, Result, C64};

mod norm;

pub use norm::{sup_norm_on_sphere, HomogeneousExpansion, HomogeneousPart, NormBudget, NormEstimate};

/// Degree limit for [`PolyMap::compose`] when no explicit truncation is asked for.
pub const COMPOSITION_DEGREE_CAP: u32 = 64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All exponent vectors of length `n` summing to `d`, in descending
    /// lexicographic order.
    pub fn all_of_degree(n: usize, d: u32) -> OfDegree {
        let mut first = vec![0; n];
        if n > 0 {
            first[0] = d;
        }
        OfDegree { current: if n > 0 { Some(first) } else { None } }
    }

    /// `C(d + n - 1, n - 1)`, saturating.
    pub fn count_of_degree(n: usize, d: u32) -> u64 {
        if n == 0 {
            return 0;
        }
        let k = (n - 1) as u64;
        let mut c: u64 = 1;
        for i in 1..=k {
            c = c.saturating_mul(d as u64 + i) / i;
        }
        c
    }
}

/// Iterator returned by [`MultiIndex::all_of_degree`].
pub struct OfDegree {
    current: Option<Vec<u32>>,
}

impl Iterator for OfDegree {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let cur = self.current.take()?;
        let n = cur.len();
        let mut next = cur.clone();
        let last = next[n - 1];
        next[n - 1] = 0;
        if let Some(j) = (0..n - 1).rev().find(|&j| next[j] > 0) {
            next[j] -= 1;
            next[j + 1] = last + 1;
            self.current = Some(next);
        }
        Some(MultiIndex(cur))
    }
}

/// Scalar polynomial in `n` complex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, C64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn variable(dim: usize, j: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, j), ONE)
    }

    pub fn monomial(index: MultiIndex, c: C64) -> Self {
        let dim = index.dim();
        let mut terms = BTreeMap::new();
        if c != ZERO {
            terms.insert(index, c);
        }
        Polynomial { dim, terms }
    }

    /// Sums repeated indices and drops zero coefficients.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, C64)>) -> Result<Self> {
        let mut p = Polynomial::zero(dim);
        for (mi, c) in terms {
            Error::check_dim(dim, mi.dim())?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid("non-finite coefficient"));
            }
            *p.terms.entry(mi).or_insert(ZERO) += c;
        }
        p.prune();
        Ok(p)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != ZERO);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, index: &MultiIndex) -> C64 {
        self.terms.get(index).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Whether any term has a positive exponent in variable `j`.
    pub fn depends_on(&self, j: usize) -> bool {
        self.terms.keys().any(|mi| mi.0[j] > 0)
    }

    fn max_exponents(&self, out: &mut [u32]) {
        for mi in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(&mi.0) {
                *o = (*o).max(e);
            }
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut p = Polynomial { dim: self.dim, terms: self.terms.iter().map(|(k, c)| (k.clone(), c * s)).collect() };
        p.prune();
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut p = self.clone();
        for (k, c) in &other.terms {
            *p.terms.entry(k.clone()).or_insert(ZERO) += c;
        }
        p.prune();
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Product, dropping every term of degree above `cap`.
    pub fn mul_truncated(&self, other: &Self, cap: Option<u32>) -> Self {
        let mut terms: BTreeMap<MultiIndex, C64> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if let Some(cap) = cap {
                    if ka.degree() + kb.degree() > cap {
                        continue;
                    }
                }
                *terms.entry(ka.plus(kb)).or_insert(ZERO) += ca * cb;
            }
        }
        let mut p = Polynomial { dim: self.dim, terms };
        p.prune();
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, None)
    }

    /// Terms of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().filter(|(mi, _)| mi.degree() == k).map(|(a, b)| (a.clone(), *b)).collect(),
        }
    }

    pub fn eval(&self, z: &[C64]) -> Result<C64> {
        Error::check_dim(self.dim, z.len())?;
        let mut maxe = vec![0; self.dim];
        self.max_exponents(&mut maxe);
        let pw = PowerTable::new(z, &maxe);
        Ok(self.eval_with(&pw))
    }

    fn eval_with(&self, pw: &PowerTable) -> C64 {
        self.terms.iter().map(|(mi, c)| c * pw.monomial(&mi.0, &[])).sum()
    }
}

/// Cached powers `z_j^e` for `e <= max exponent of variable j`.
struct PowerTable {
    pows: Vec<Vec<C64>>,
}

impl PowerTable {
    fn new(z: &[C64], max_exp: &[u32]) -> Self {
        let pows = z
            .iter()
            .zip(max_exp)
            .map(|(&zj, &e)| {
                let mut v = Vec::with_capacity(e as usize + 1);
                let mut acc = ONE;
                v.push(acc);
                for _ in 0..e {
                    acc *= zj;
                    v.push(acc);
                }
                v
            })
            .collect();
        PowerTable { pows }
    }

    /// `z^(e - sum of decrements)`; each decrement is `(variable, amount)` and
    /// must not exceed the exponent.
    fn monomial(&self, e: &[u32], dec: &[(usize, u32)]) -> C64 {
        let mut acc = ONE;
        for (j, &ej) in e.iter().enumerate() {
            let d: u32 = dec.iter().filter(|(v, _)| *v == j).map(|(_, a)| a).sum();
            let p = ej - d;
            if p > 0 {
                acc *= self.pows[j][p as usize];
            }
        }
        acc
    }
}

/// Polynomial map `C^n -> C^n`, one [`Polynomial`] per output coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    dim: usize,
    coords: Vec<Polynomial>,
}

impl PolyMap {
    pub fn new(coords: Vec<Polynomial>) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 {
            return Err(Error::invalid("polynomial map needs at least one coordinate"));
        }
        for c in &coords {
            Error::check_dim(dim, c.dim())?;
        }
        Ok(PolyMap { dim, coords })
    }

    pub fn identity(dim: usize) -> Self {
        PolyMap { dim, coords: (0..dim).map(|j| Polynomial::variable(dim, j)).collect() }
    }

    pub fn linear(matrix: &Matrix) -> Self {
        let n = matrix.dim();
        let coords = (0..n)
            .map(|i| {
                let mut p = Polynomial::zero(n);
                for j in 0..n {
                    if matrix[(i, j)] != ZERO {
                        p.terms.insert(MultiIndex::unit(n, j), matrix[(i, j)]);
                    }
                }
                p
            })
            .collect();
        PolyMap { dim: n, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[Polynomial] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Polynomial {
        &self.coords[i]
    }

    pub fn max_degree(&self) -> u32 {
        self.coords.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Vec<C64> {
        let zero = MultiIndex::zero(self.dim);
        self.coords.iter().map(|p| p.coefficient(&zero)).collect()
    }

    /// `Df(0)`, read off the degree-one coefficients.
    pub fn linear_part(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim);
        for (i, p) in self.coords.iter().enumerate() {
            for j in 0..self.dim {
                m[(i, j)] = p.coefficient(&MultiIndex::unit(self.dim, j));
            }
        }
        m
    }

    /// `f(0) = 0` and `Df(0) = I`, exactly on the stored coefficients.
    pub fn is_normalized(&self) -> bool {
        self.constant_term().iter().all(|c| *c == ZERO) && self.linear_part() == Matrix::identity(self.dim)
    }

    /// Largest deviation of the constant and linear coefficients from `(0, I)`.
    pub fn normalization_defect(&self) -> f64 {
        let c = self.constant_term().iter().map(|c| c.norm()).fold(0.0, f64::max);
        c.max(self.linear_part().max_abs_diff(&Matrix::identity(self.dim)))
    }

    /// Overwrites the constant and linear coefficients with `(0, I)`.
    pub(crate) fn force_normalized(&mut self) {
        let n = self.dim;
        for (i, p) in self.coords.iter_mut().enumerate() {
            p.terms.remove(&MultiIndex::zero(n));
            for j in 0..n {
                let key = MultiIndex::unit(n, j);
                if i == j {
                    p.terms.insert(key, ONE);
                } else {
                    p.terms.remove(&key);
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Error::check_dim(self.dim, other.dim)?;
        Ok(PolyMap { dim: self.dim, coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Error::check_dim(self.dim, other.dim)?;
        Ok(PolyMap { dim: self.dim, coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a.sub(b)).collect() })
    }

    pub fn scale(&self, s: C64) -> Self {
        PolyMap { dim: self.dim, coords: self.coords.iter().map(|p| p.scale(s)).collect() }
    }

    /// Map made of the terms of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        PolyMap { dim: self.dim, coords: self.coords.iter().map(|p| p.homogeneous_part(k)).collect() }
    }

    fn power_table(&self, z: &[C64]) -> PowerTable {
        let mut maxe = vec![0; self.dim];
        for p in &self.coords {
            p.max_exponents(&mut maxe);
        }
        PowerTable::new(z, &maxe)
    }

    pub fn eval(&self, z: &[C64]) -> Result<Vec<C64>> {
        Error::check_dim(self.dim, z.len())?;
        let pw = self.power_table(z);
        Ok(self.coords.iter().map(|p| p.eval_with(&pw)).collect())
    }

    /// `Df(z)`.
    pub fn jacobian(&self, z: &[C64]) -> Result<Matrix> {
        Error::check_dim(self.dim, z.len())?;
        let pw = self.power_table(z);
        let mut m = Matrix::zeros(self.dim);
        for (i, p) in self.coords.iter().enumerate() {
            for (mi, c) in &p.terms {
                for (j, &ej) in mi.0.iter().enumerate() {
                    if ej > 0 {
                        m[(i, j)] += c * (ej as f64) * pw.monomial(&mi.0, &[(j, 1)]);
                    }
                }
            }
        }
        Ok(m)
    }

    /// `D^2 f(z)(v, v)`.
    pub fn second_derivative(&self, z: &[C64], v: &[C64]) -> Result<Vec<C64>> {
        Error::check_dim(self.dim, z.len())?;
        Error::check_dim(self.dim, v.len())?;
        let pw = self.power_table(z);
        let n = self.dim;
        Ok(self
            .coords
            .iter()
            .map(|p| {
                let mut acc = ZERO;
                for (mi, c) in &p.terms {
                    let e = &mi.0;
                    let mut s = ZERO;
                    for j in 0..n {
                        if e[j] >= 2 {
                            s += pw.monomial(e, &[(j, 2)]) * v[j] * v[j] * ((e[j] * (e[j] - 1)) as f64);
                        }
                        for l in j + 1..n {
                            if e[j] >= 1 && e[l] >= 1 {
                                s += pw.monomial(e, &[(j, 1), (l, 1)]) * v[j] * v[l] * (2.0 * (e[j] * e[l]) as f64);
                            }
                        }
                    }
                    acc += c * s;
                }
                acc
            })
            .collect())
    }

    /// Solves `Df(z) u = w` by partial-pivot elimination.
    pub fn jacobian_solve(&self, z: &[C64], w: &[C64]) -> Result<Vec<C64>> {
        Error::check_dim(self.dim, w.len())?;
        let lu = Lu::factor(&self.jacobian(z)?)?;
        Ok(lu.solve(w))
    }

    /// `self ∘ inner`, optionally truncated above `degree_cap`.
    ///
    /// Without truncation the result degree may not exceed
    /// [`COMPOSITION_DEGREE_CAP`].
    pub fn compose(&self, inner: &PolyMap, degree_cap: Option<u32>) -> Result<PolyMap> {
        Error::check_dim(self.dim, inner.dim)?;
        let n = self.dim;
        let inner_deg: Vec<u32> = inner.coords.iter().map(Polynomial::degree).collect();
        let predicted = self
            .coords
            .iter()
            .flat_map(|p| p.terms.keys())
            .map(|mi| mi.0.iter().zip(&inner_deg).map(|(e, d)| e * d).sum::<u32>())
            .max()
            .unwrap_or(0);
        let within_hard_cap = matches!(degree_cap, Some(c) if c <= COMPOSITION_DEGREE_CAP);
        if predicted > COMPOSITION_DEGREE_CAP && !within_hard_cap {
            return Err(Error::DegreeCap { degree: predicted, cap: COMPOSITION_DEGREE_CAP });
        }

        let mut maxe = vec![0; n];
        for p in &self.coords {
            p.max_exponents(&mut maxe);
        }
        let powers: Vec<Vec<Polynomial>> = (0..n)
            .map(|j| {
                let mut v = Vec::with_capacity(maxe[j] as usize + 1);
                v.push(Polynomial::constant(n, ONE));
                for e in 0..maxe[j] as usize {
                    let next = v[e].mul_truncated(&inner.coords[j], degree_cap);
                    v.push(next);
                }
                v
            })
            .collect();

        let coords = self
            .coords
            .iter()
            .map(|p| {
                let mut out = Polynomial::zero(n);
                for (mi, c) in &p.terms {
                    let mut term = Polynomial::constant(n, *c);
                    for (j, &e) in mi.0.iter().enumerate() {
                        if e > 0 {
                            term = term.mul_truncated(&powers[j][e as usize], degree_cap);
                        }
                    }
                    for (k, v) in term.terms {
                        *out.terms.entry(k).or_insert(ZERO) += v;
                    }
                }
                out.prune();
                out
            })
            .collect();
        Ok(PolyMap { dim: n, coords })
    }

    /// `z -> f(r z) / r`: degree-`k` coefficients scale by `r^{k-1}`.
    pub fn dilate(&self, r: f64) -> Result<PolyMap> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::invalid("dilation radius must lie in (0, 1]"));
        }
        if !self.is_normalized() {
            return Err(Error::precondition("dilation needs a normalized map"));
        }
        let coords = self
            .coords
            .iter()
            .map(|p| {
                let mut q = Polynomial {
                    dim: p.dim,
                    terms: p.terms.iter().map(|(mi, c)| (mi.clone(), c * dilation_factor(r, mi.degree()))).collect(),
                };
                q.prune();
                q
            })
            .collect();
        Ok(PolyMap { dim: self.dim, coords })
    }

    /// Splits a normalized map into its homogeneous parts of degree `>= 2`
    /// and estimates `||A_k|| = sup_{|z| = 1} ||A_k(z)||` for each.
    pub fn homogeneous_parts(&self, budget: &NormBudget) -> Result<HomogeneousExpansion> {
        if !self.is_normalized() {
            return Err(Error::precondition("homogeneous expansion needs a normalized map"));
        }
        Ok(HomogeneousExpansion::of(self, budget))
    }

    /// `(sum k ||A_k||, sum k^2 ||A_k||)`.
    pub fn coefficient_functionals(&self, budget: &NormBudget) -> Result<(f64, f64)> {
        let exp = self.homogeneous_parts(budget)?;
        Ok(exp.functionals())
    }
}

/// `r^(k - 1)` by repeated multiplication.
pub fn dilation_factor(r: f64, degree: u32) -> f64 {
    if degree == 0 {
        return 1.0 / r;
    }
    let mut acc = 1.0;
    for _ in 1..degree {
        acc *= r;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// `(z1 + a z2^2, z2)`
    fn shear(a: f64) -> PolyMap {
        let n = 2;
        let p0 = Polynomial::variable(n, 0).add(&Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(a)));
        PolyMap::new(vec![p0, Polynomial::variable(n, 1)]).unwrap()
    }

    #[test]
    fn multi_index_enumeration_counts() {
        for n in 1..5 {
            for d in 0..6 {
                let all: Vec<_> = MultiIndex::all_of_degree(n, d).collect();
                assert_eq!(all.len() as u64, MultiIndex::count_of_degree(n, d));
                assert!(all.iter().all(|m| m.degree() == d));
                assert!(all.windows(2).all(|w| w[0] > w[1]));
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f = shear(0.5);
        let id = PolyMap::identity(2);
        let z = vec![C64::new(0.3, -0.1), C64::new(0.2, 0.4)];
        assert_eq!(id.eval(&z).unwrap(), z);
        assert_eq!(f.eval(&[c(0.0), c(1.0)]).unwrap(), vec![c(0.5), c(1.0)]);
        let w = f.eval(&[c(0.1), c(0.2)]).unwrap();
        assert!((w[0] - c(0.12)).norm() < 1e-16 && w[1] == c(0.2));
    }

    #[test]
    fn eval_dimension_mismatch() {
        assert!(matches!(shear(0.5).eval(&[c(0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn jacobian_of_shear() {
        let a = 0.7;
        let z = vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.5)];
        let j = shear(a).jacobian(&z).unwrap();
        assert_eq!(j[(0, 0)], c(1.0));
        assert!((j[(0, 1)] - z[1] * 2.0 * a).norm() < 1e-16);
        assert_eq!(j[(1, 0)], c(0.0));
        assert_eq!(j[(1, 1)], c(1.0));
        assert_eq!(PolyMap::identity(2).jacobian(&z).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn second_derivative_of_shear() {
        let a = 0.7;
        let z = vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.5)];
        let v = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let d2 = shear(a).second_derivative(&z, &v).unwrap();
        assert!((d2[0] - v[1] * v[1] * 2.0 * a).norm() < 1e-16);
        assert_eq!(d2[1], c(0.0));
        assert!(PolyMap::identity(2).second_derivative(&z, &v).unwrap().iter().all(|x| *x == c(0.0)));
    }

    #[test]
    fn jacobian_solve_examples() {
        let a = 0.4;
        let f = shear(a);
        let z = vec![C64::new(0.2, 0.1), C64::new(0.3, -0.2)];
        let w = C64::new(1.0, 2.0);
        let u = PolyMap::identity(2).jacobian_solve(&z, &[w, w]).unwrap();
        assert_eq!(u, vec![w, w]);
        // Df^{-1} f = (z1 - a z2^2, z2) for the triangular shear Jacobian.
        let u = f.jacobian_solve(&z, &f.eval(&z).unwrap()).unwrap();
        assert!((u[0] - (z[0] - z[1] * z[1] * a)).norm() < 1e-15);
        assert!((u[1] - z[1]).norm() < 1e-15);
    }

    #[test]
    fn jacobian_solve_singular() {
        let sq = PolyMap::new(vec![
            Polynomial::monomial(MultiIndex::new(vec![2, 0]), c(1.0)),
            Polynomial::variable(2, 1),
        ])
        .unwrap();
        let r = sq.jacobian_solve(&[c(0.0), c(0.4)], &[c(1.0), c(1.0)]);
        assert!(matches!(r, Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn compose_examples() {
        let f = shear(0.3);
        assert_eq!(f.compose(&PolyMap::identity(2), None).unwrap(), f);
        assert_eq!(f.compose(&shear(-0.3), None).unwrap(), PolyMap::identity(2));
    }

    #[test]
    fn compose_degree_cap() {
        // (z1 + z2^8, z2) composed with itself 4 times stays degree 8, but
        // (z1, z2 + z1^8) o (z1 + z2^8, z2) has degree 64 and one more layer exceeds the cap.
        let n = 2;
        let s1 = PolyMap::new(vec![
            Polynomial::variable(n, 0).add(&Polynomial::monomial(MultiIndex::new(vec![0, 8]), c(1.0))),
            Polynomial::variable(n, 1),
        ])
        .unwrap();
        let s2 = PolyMap::new(vec![
            Polynomial::variable(n, 0),
            Polynomial::variable(n, 1).add(&Polynomial::monomial(MultiIndex::new(vec![8, 0]), c(1.0))),
        ])
        .unwrap();
        let g = s2.compose(&s1, None).unwrap();
        assert_eq!(g.max_degree(), 64);
        assert!(matches!(s1.compose(&g, None), Err(Error::DegreeCap { .. })));
        let t = s1.compose(&g, Some(10)).unwrap();
        assert!(t.max_degree() <= 10);
    }

    #[test]
    fn dilate_examples() {
        let f = shear(0.5);
        assert_eq!(f.dilate(1.0).unwrap(), f);
        let g = f.dilate(0.25).unwrap();
        assert_eq!(g.coord(0).coefficient(&MultiIndex::new(vec![0, 2])), c(0.125));
        assert!(g.is_normalized());
        assert!(f.dilate(0.0).is_err() && f.dilate(1.5).is_err());
        let unnormalized = f.scale(c(2.0));
        assert!(matches!(unnormalized.dilate(0.5), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn dilation_factor_matches_pow() {
        for k in 1..12 {
            let r = 0.37;
            assert!((dilation_factor(r, k) - libm::pow(r, (k - 1) as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn normalization_checks() {
        assert!(PolyMap::identity(3).is_normalized());
        assert!(shear(2.0).is_normalized());
        let mut shifted = shear(1.0);
        shifted.coords[0] = shifted.coords[0].add(&Polynomial::constant(2, c(1.0)));
        assert!(!shifted.is_normalized());
        assert_eq!(shifted.normalization_defect(), 1.0);
    }
}
