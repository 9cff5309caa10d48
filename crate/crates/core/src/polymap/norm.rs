//! Sup-norm estimates `sup_{|z| = rho} ||P(z)||` for polynomial maps.
//!
//! Seeded sphere sampling gives a lower bound; the best samples are then
//! polished by ascent on the sphere. For a holomorphic map the sup over the
//! closed ball is attained on the boundary sphere, so the same routine serves
//! for ball distances.

use alloc::vec::Vec;

use super::PolyMap;
use crate::exec::map_ordered;
use crate::linalg::{norm, scale_real};
use crate::sample::{random_unit_vector, seeded};
use crate::C64;

/// Sampling and refinement budget for sup-norm estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBudget {
    pub samples: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for NormBudget {
    fn default() -> Self {
        NormBudget { samples: 20_000, restarts: 50, iterations: 200, seed: 0x5eed_0001 }
    }
}

/// Lower-bound estimate of a sup norm on a sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    /// `max(sampled, refined)`; still a lower bound of the true sup.
    pub value: f64,
    /// Best value among the raw samples.
    pub sampled: f64,
    /// Gain contributed by the ascent, `value - sampled`.
    pub refinement_delta: f64,
    pub argmax: Vec<C64>,
}

/// Estimates `sup_{||z|| = radius} ||map(z)||`.
pub fn sup_norm_on_sphere(map: &PolyMap, radius: f64, budget: &NormBudget) -> NormEstimate {
    let n = map.dim();
    let mut rng = seeded(budget.seed);
    let mut starts: Vec<(f64, Vec<C64>)> = Vec::with_capacity(budget.samples + n);
    // The coordinate axes are cheap and frequently extremal.
    for j in 0..n {
        let mut e = alloc::vec![C64::new(0.0, 0.0); n];
        e[j] = C64::new(radius, 0.0);
        starts.push((value_at(map, &e), e));
    }
    let mut sampled = starts.iter().map(|s| s.0).fold(0.0, f64::max);
    let mut best_point = starts.first().map(|s| s.1.clone()).unwrap_or_default();
    for _ in 0..budget.samples {
        let z = scale_real(&random_unit_vector(&mut rng, n), radius);
        let v = value_at(map, &z);
        if v > sampled {
            sampled = v;
            best_point = z.clone();
        }
        starts.push((v, z));
    }

    // Keep the best starts; ties broken by generation order for determinism.
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by(|&a, &b| starts[b].0.partial_cmp(&starts[a].0).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let chosen: Vec<Vec<C64>> = order.iter().take(budget.restarts).map(|&i| starts[i].1.clone()).collect();
    let refined = map_ordered(&chosen, |z| ascend(map, radius, z, budget.iterations));

    let mut value = sampled;
    let mut argmax = best_point;
    for (v, z) in refined {
        if v > value {
            value = v;
            argmax = z;
        }
    }
    NormEstimate { value, sampled, refinement_delta: value - sampled, argmax }
}

fn value_at(map: &PolyMap, z: &[C64]) -> f64 {
    map.eval(z).map(|w| norm(&w)).unwrap_or(0.0)
}

fn project(z: &[C64], radius: f64) -> Option<Vec<C64>> {
    let nz = norm(z);
    if nz > 0.0 && nz.is_finite() {
        Some(scale_real(z, radius / nz))
    } else {
        None
    }
}

/// Ascent of `||P||^2` restricted to the sphere. Each round tries the
/// fixed-point step `z <- rho * normalize(DP^* P)` and a backtracking step along
/// the Euclidean gradient `2 DP^* P`, keeping whichever improves more.
pub(crate) fn ascend(map: &PolyMap, radius: f64, start: &[C64], iterations: usize) -> (f64, Vec<C64>) {
    let mut z = start.to_vec();
    let mut val = value_at(map, &z);
    let mut step = 1.0;
    for _ in 0..iterations {
        let (p, j) = match (map.eval(&z), map.jacobian(&z)) {
            (Ok(p), Ok(j)) => (p, j),
            _ => break,
        };
        let g = j.adjoint().matvec(&p);
        let gn = norm(&g);
        if !(gn > 0.0) {
            break;
        }

        let mut best = (val, None::<Vec<C64>>);
        if let Some(fp) = project(&g, radius) {
            let v = value_at(map, &fp);
            if v > best.0 {
                best = (v, Some(fp));
            }
        }
        let dir = scale_real(&g, radius / gn);
        let mut s = step;
        while s > 1e-14 {
            let trial: Vec<C64> = z.iter().zip(&dir).map(|(a, b)| a + b * s).collect();
            if let Some(y) = project(&trial, radius) {
                let v = value_at(map, &y);
                if v > val {
                    if v > best.0 {
                        best = (v, Some(y));
                    }
                    step = (s * 2.0).min(4.0);
                    break;
                }
            }
            s *= 0.5;
        }
        if s <= 1e-14 {
            step = 1e-3;
        }

        match best {
            (v, Some(y)) if v > val => {
                let gain = v - val;
                val = v;
                z = y;
                if gain <= 1e-16 * val.max(1e-300) {
                    break;
                }
            }
            _ => break,
        }
    }
    (val, z)
}

/// One homogeneous component `A_k` with its norm estimate.
#[derive(Debug, Clone)]
pub struct HomogeneousPart {
    pub degree: u32,
    pub map: PolyMap,
    pub norm: NormEstimate,
}

/// Split `f = id + sum_{k >= 2} A_k` of a normalized polynomial map.
#[derive(Debug, Clone)]
pub struct HomogeneousExpansion {
    pub dim: usize,
    pub parts: Vec<HomogeneousPart>,
}

impl HomogeneousExpansion {
    pub(crate) fn of(f: &PolyMap, budget: &NormBudget) -> Self {
        let degrees: Vec<u32> = (2..=f.max_degree()).collect();
        let parts = degrees
            .iter()
            .filter_map(|&k| {
                let part = f.homogeneous_part(k);
                if part.coords().iter().all(|p| p.is_zero()) {
                    return None;
                }
                let norm = sup_norm_on_sphere(&part, 1.0, budget);
                Some(HomogeneousPart { degree: k, map: part, norm })
            })
            .collect();
        HomogeneousExpansion { dim: f.dim(), parts }
    }

    /// `id + sum A_k`.
    pub fn reconstruct(&self) -> PolyMap {
        let mut acc = PolyMap::identity(self.dim);
        for p in &self.parts {
            acc = acc.add(&p.map).expect("parts share the dimension");
        }
        acc
    }

    /// `(k, ||A_k||)` pairs.
    pub fn norms(&self) -> Vec<(u32, f64)> {
        self.parts.iter().map(|p| (p.degree, p.norm.value)).collect()
    }

    /// `(sum k ||A_k||, sum k^2 ||A_k||)`.
    pub fn functionals(&self) -> (f64, f64) {
        self.parts.iter().fold((0.0, 0.0), |(s1, s2), p| {
            let k = p.degree as f64;
            (s1 + k * p.norm.value, s2 + k * k * p.norm.value)
        })
    }

    /// Largest refinement gap among the parts.
    pub fn max_refinement_delta(&self) -> f64 {
        self.parts.iter().map(|p| p.norm.refinement_delta).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymap::{MultiIndex, Polynomial};
    use alloc::vec;

    fn quad_x(c: f64) -> PolyMap {
        PolyMap::new(vec![
            Polynomial::variable(2, 0).add(&Polynomial::monomial(MultiIndex::new(vec![2, 0]), C64::new(c, 0.0))),
            Polynomial::variable(2, 1),
        ])
        .unwrap()
    }

    #[test]
    fn single_quadratic_norm() {
        let exp = quad_x(0.4).homogeneous_parts(&NormBudget::default()).unwrap();
        assert_eq!(exp.parts.len(), 1);
        assert!((exp.parts[0].norm.value - 0.4).abs() < 1e-12);
        let (s1, s2) = exp.functionals();
        assert!((s1 - 0.8).abs() < 1e-12 && (s2 - 1.6).abs() < 1e-12);
    }

    #[test]
    fn identity_has_no_parts() {
        let exp = PolyMap::identity(3).homogeneous_parts(&NormBudget::default()).unwrap();
        assert!(exp.parts.is_empty());
        assert_eq!(exp.functionals(), (0.0, 0.0));
    }

    #[test]
    fn mixed_monomial_norm() {
        // sup |z1 z2^2| on the sphere is 2/(3 sqrt 3).
        let p = PolyMap::new(vec![
            Polynomial::monomial(MultiIndex::new(vec![1, 2]), C64::new(1.0, 0.0)),
            Polynomial::zero(2),
        ])
        .unwrap();
        let est = sup_norm_on_sphere(&p, 1.0, &NormBudget::default());
        let exact = 2.0 / (3.0 * libm::sqrt(3.0));
        assert!(est.value <= exact + 1e-14);
        assert!(exact - est.value < 1e-12, "{} vs {}", est.value, exact);
    }
}
