//! Seeded sampling of the unit ball and of real-orthogonal tangent pairs.

use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{inner, norm, scale_real};
use crate::{Error, Result, C64};

/// Deterministic generator used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Default sphere radii for criterion sampling.
pub const DEFAULT_RADII: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

/// Vector with i.i.d. standard complex Gaussian entries.
pub fn gaussian_vector(rng: &mut Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

/// Uniformly distributed point on the unit sphere of `C^n`.
pub fn random_unit_vector(rng: &mut Rng, n: usize) -> Vec<C64> {
    loop {
        let g = gaussian_vector(rng, n);
        let r = norm(&g);
        if r > 1e-300 {
            return scale_real(&g, 1.0 / r);
        }
    }
}

/// Removes the component of `v` along `z` in the real inner product
/// `Re <., .>` and renormalizes. Returns `None` if nothing is left.
pub fn tangent_projection(z: &[C64], v: &[C64]) -> Option<Vec<C64>> {
    let nz = norm(z);
    let zz = nz * nz;
    let mut w = v.to_vec();
    if zz > 0.0 {
        // Two passes: the second removes the rounding residue of the first.
        for _ in 0..2 {
            let c = inner(&w, z).re / zz;
            for (wi, zi) in w.iter_mut().zip(z) {
                *wi -= zi * c;
            }
            let nw = norm(&w);
            if !(nw > 1e-12) {
                return None;
            }
            w = scale_real(&w, 1.0 / nw);
        }
    } else {
        let nw = norm(&w);
        if !(nw > 0.0) {
            return None;
        }
        w = scale_real(&w, 1.0 / nw);
    }
    Some(w)
}

/// A point `z` with a unit vector `v` satisfying `Re <z, v> = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub z: Vec<C64>,
    pub v: Vec<C64>,
}

/// Points on concentric spheres inside the unit ball, with tangent pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSample {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub points: Vec<Vec<C64>>,
    pub tangent_pairs: Vec<TangentPair>,
    pub seed: u64,
}

impl BallSample {
    /// Sample built from explicit points; tangents are generated from `seed`.
    pub fn from_points(dim: usize, points: Vec<Vec<C64>>, tangent_count: usize, seed: u64) -> Result<Self> {
        let mut rng = seeded(seed);
        for p in &points {
            Error::check_dim(dim, p.len())?;
            if !(norm(p) < 1.0) {
                return Err(Error::invalid("sample points must lie inside the unit ball"));
            }
        }
        let mut radii: Vec<f64> = Vec::new();
        for p in &points {
            let r = norm(p);
            if !radii.iter().any(|&q| (q - r).abs() < 1e-12) {
                radii.push(r);
            }
        }
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tangent_pairs = tangents_for(&points, tangent_count, &mut rng);
        Ok(BallSample { dim, radii, points, tangent_pairs, seed })
    }

    /// Same directions on spheres shrunk by `r`.
    pub fn scaled(&self, r: f64) -> BallSample {
        BallSample {
            dim: self.dim,
            radii: self.radii.iter().map(|q| q * r).collect(),
            points: self.points.iter().map(|p| scale_real(p, r)).collect(),
            tangent_pairs: self
                .tangent_pairs
                .iter()
                .map(|t| TangentPair { z: scale_real(&t.z, r), v: t.v.clone() })
                .collect(),
            seed: self.seed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn tangents_for(points: &[Vec<C64>], per_point: usize, rng: &mut Rng) -> Vec<TangentPair> {
    let mut out = Vec::with_capacity(points.len() * per_point);
    for z in points {
        let mut made = 0;
        while made < per_point {
            let g = gaussian_vector(rng, z.len());
            if let Some(v) = tangent_projection(z, &g) {
                out.push(TangentPair { z: z.clone(), v });
                made += 1;
            }
        }
    }
    out
}

/// `per_sphere` directions on each sphere of `radii`, plus `tangent_count`
/// tangent vectors per point. Deterministic in `seed`.
pub fn make_sample(dim: usize, radii: &[f64], per_sphere: usize, tangent_count: usize, seed: u64) -> Result<BallSample> {
    if per_sphere == 0 {
        return Err(Error::invalid("per_sphere must be at least 1"));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::invalid("radii must lie in (0, 1)"));
    }
    let mut rng = seeded(seed);
    let mut points = Vec::with_capacity(radii.len() * per_sphere);
    for &r in radii {
        for _ in 0..per_sphere {
            points.push(scale_real(&random_unit_vector(&mut rng, dim), r));
        }
    }
    let tangent_pairs = tangents_for(&points, tangent_count, &mut rng);
    Ok(BallSample { dim, radii: radii.to_vec(), points, tangent_pairs, seed })
}
