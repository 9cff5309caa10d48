//! Maximization of pair functionals `F(z, v)` over `||z|| <= r`, `||v|| = 1`
//! (optionally with `Re <z, v> = 0`): sampling followed by projected
//! finite-difference ascent from the best samples.

use alloc::vec::Vec;

use crate::exec::map_ordered;
use crate::linalg::{inner, norm, scale_real};
use crate::polymap::PolyMap;
use crate::sample::{gaussian_vector, random_unit_vector, seeded, tangent_projection, TangentPair};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaBudget {
    pub samples: usize,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DeltaBudget {
    fn default() -> Self {
        DeltaBudget { samples: 4000, restarts: 16, iterations: 300, seed: 0x5eed_0002 }
    }
}

/// Lower-bound estimate of a maximum, with the ascent's contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub value: f64,
    pub sampled: f64,
    pub refinement_delta: f64,
    pub witness: Option<TangentPair>,
}

/// `δ(r) = max Re <Df(z)^{-1} D^2 f(z)(v, v), z>` over `||z|| <= r` and unit
/// `v` with `Re <z, v> = 0`. The origin is always a candidate, so `δ >= 0`.
pub fn compute_delta(f: &PolyMap, r: f64, budget: &DeltaBudget) -> Result<DeltaEstimate> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::invalid("radius must lie in (0, 1)"));
    }
    let objective = |z: &[C64], v: &[C64]| -> Option<f64> {
        let d2 = f.second_derivative(z, v).ok()?;
        let u = f.jacobian_solve(z, &d2).ok()?;
        Some(inner(&u, z).re)
    };
    Ok(maximize_over_pairs(f.dim(), r, true, budget, objective))
}

fn project(z: &[C64], v: &[C64], r: f64, tangent: bool) -> Option<(Vec<C64>, Vec<C64>)> {
    let nz = norm(z);
    let z = if nz > r { scale_real(z, r / nz) } else { z.to_vec() };
    let v = if tangent {
        tangent_projection(&z, v)?
    } else {
        let nv = norm(v);
        if !(nv > 0.0) {
            return None;
        }
        scale_real(v, 1.0 / nv)
    };
    Some((z, v))
}

/// Generic maximizer; `objective` returns `None` where it is undefined
/// (e.g. a singular Jacobian), and such points are ignored.
pub fn maximize_over_pairs<F>(dim: usize, r: f64, tangent: bool, budget: &DeltaBudget, objective: F) -> DeltaEstimate
where
    F: Fn(&[C64], &[C64]) -> Option<f64> + Sync + Send,
{
    let mut rng = seeded(budget.seed);
    let mut cands: Vec<(f64, Vec<C64>, Vec<C64>)> = Vec::with_capacity(budget.samples + 1);

    let origin = alloc::vec![C64::new(0.0, 0.0); dim];
    if let Some((z, v)) = project(&origin, &random_unit_vector(&mut rng, dim), r, tangent) {
        if let Some(val) = objective(&z, &v) {
            cands.push((val, z, v));
        }
    }
    for i in 0..budget.samples {
        // Alternate between the bounding sphere and the interior.
        let rad = if i % 2 == 0 {
            r
        } else {
            let u: f64 = rand::Rng::random(&mut rng);
            r * libm::pow(u, 1.0 / (2.0 * dim as f64))
        };
        let z = scale_real(&random_unit_vector(&mut rng, dim), rad);
        let g = gaussian_vector(&mut rng, dim);
        if let Some((z, v)) = project(&z, &g, r, tangent) {
            if let Some(val) = objective(&z, &v) {
                cands.push((val, z, v));
            }
        }
    }
    if cands.is_empty() {
        return DeltaEstimate { value: f64::NEG_INFINITY, sampled: f64::NEG_INFINITY, refinement_delta: 0.0, witness: None };
    }

    let mut order: Vec<usize> = (0..cands.len()).collect();
    order.sort_by(|&a, &b| cands[b].0.partial_cmp(&cands[a].0).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let best_sample = order[0];
    let sampled = cands[best_sample].0;
    let starts: Vec<(f64, Vec<C64>, Vec<C64>)> = order.iter().take(budget.restarts).map(|&i| cands[i].clone()).collect();
    let refined = map_ordered(&starts, |(val, z, v)| ascend(&objective, *val, z, v, r, tangent, budget.iterations));

    let (mut value, mut wz, mut wv) = (sampled, cands[best_sample].1.clone(), cands[best_sample].2.clone());
    for (val, z, v) in refined {
        if val > value {
            value = val;
            wz = z;
            wv = v;
        }
    }
    DeltaEstimate { value, sampled, refinement_delta: value - sampled, witness: Some(TangentPair { z: wz, v: wv }) }
}

fn ascend<F>(
    objective: &F,
    start_val: f64,
    z0: &[C64],
    v0: &[C64],
    r: f64,
    tangent: bool,
    iterations: usize,
) -> (f64, Vec<C64>, Vec<C64>)
where
    F: Fn(&[C64], &[C64]) -> Option<f64>,
{
    let n = z0.len();
    let (mut z, mut v, mut val) = (z0.to_vec(), v0.to_vec(), start_val);
    let mut step = 0.05 * r.max(1e-3);
    let h = 1e-6;
    let eval = |z: &[C64], v: &[C64]| -> Option<(f64, Vec<C64>, Vec<C64>)> {
        let (pz, pv) = project(z, v, r, tangent)?;
        objective(&pz, &pv).map(|f| (f, pz, pv))
    };
    for _ in 0..iterations {
        // Central differences in the 4n real coordinates of (z, v).
        let mut grad = alloc::vec![0.0; 4 * n];
        for (k, g) in grad.iter_mut().enumerate() {
            let bump = |s: f64| -> (Vec<C64>, Vec<C64>) {
                let mut zz = z.clone();
                let mut vv = v.clone();
                let d = if k % 2 == 0 { C64::new(s, 0.0) } else { C64::new(0.0, s) };
                let idx = k / 2;
                if idx < n {
                    zz[idx] += d;
                } else {
                    vv[idx - n] += d;
                }
                (zz, vv)
            };
            let (zp, vp) = bump(h);
            let (zm, vm) = bump(-h);
            if let (Some(fp), Some(fm)) = (eval(&zp, &vp), eval(&zm, &vm)) {
                *g = (fp.0 - fm.0) / (2.0 * h);
            }
        }
        let gn = libm::sqrt(grad.iter().map(|g| g * g).sum::<f64>());
        if !(gn > 0.0) {
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut zz = z.clone();
            let mut vv = v.clone();
            for (k, g) in grad.iter().enumerate() {
                let d = step * g / gn;
                let d = if k % 2 == 0 { C64::new(d, 0.0) } else { C64::new(0.0, d) };
                let idx = k / 2;
                if idx < n {
                    zz[idx] += d;
                } else {
                    vv[idx - n] += d;
                }
            }
            match eval(&zz, &vv) {
                Some((f, pz, pv)) if f > val => {
                    val = f;
                    z = pz;
                    v = pv;
                    step *= 1.5;
                    improved = true;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !improved {
            break;
        }
    }
    (val, z, v)
}
