//! Polynomial automorphisms of `C^n` as words in shears, overshears and
//! invertible linear maps.
//!
//! Factors are applied in list order: the word `[F1, F2]` is the map
//! `F2 ∘ F1`. Every factor has a polynomial inverse, so the inverse word is
//! the reversed list of inverted factors.

use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::polymap::{PolyMap, Polynomial};
use crate::{Error, Result, C64};

/// Linear parts within this distance of the identity are snapped to it when
/// a normalized word is expanded.
pub const NORMALIZATION_SNAP: f64 = 1e-10;

/// One generator of a word.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `z_axis <- z_axis + poly(ẑ_axis)`.
    Shear { axis: usize, poly: Polynomial },
    /// `z_axis <- scale * z_axis + poly(ẑ_axis)`, `scale != 0`.
    Overshear { axis: usize, scale: C64, poly: Polynomial },
    /// `z <- M z`, `M` invertible.
    Linear { matrix: Matrix },
}

impl Factor {
    pub fn shear(axis: usize, poly: Polynomial) -> Self {
        Factor::Shear { axis, poly }
    }

    pub fn linear(matrix: Matrix) -> Self {
        Factor::Linear { matrix }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Factor::Shear { axis, poly } | Factor::Overshear { axis, poly, .. } => {
                if *axis >= dim {
                    return Err(Error::invalid("shear axis out of range"));
                }
                Error::check_dim(dim, poly.dim())?;
                if poly.depends_on(*axis) {
                    return Err(Error::invalid("shear polynomial must not involve its own axis variable"));
                }
                if let Factor::Overshear { scale, .. } = self {
                    if *scale == C64::new(0.0, 0.0) || !(scale.re.is_finite() && scale.im.is_finite()) {
                        return Err(Error::invalid("overshear scale must be finite and nonzero"));
                    }
                }
                Ok(())
            }
            Factor::Linear { matrix } => {
                Error::check_dim(dim, matrix.dim())?;
                if !matrix.is_finite() {
                    return Err(Error::invalid("non-finite linear factor"));
                }
                matrix.inverse().map(|_| ()).map_err(|_| Error::invalid("linear factor is singular"))
            }
        }
    }

    pub fn inverse(&self) -> Result<Factor> {
        Ok(match self {
            Factor::Shear { axis, poly } => Factor::Shear { axis: *axis, poly: poly.scale(C64::new(-1.0, 0.0)) },
            Factor::Overshear { axis, scale, poly } => {
                let s = scale.inv();
                Factor::Overshear { axis: *axis, scale: s, poly: poly.scale(-s) }
            }
            Factor::Linear { matrix } => Factor::Linear { matrix: matrix.inverse()? },
        })
    }

    pub fn to_polymap(&self, dim: usize) -> PolyMap {
        match self {
            Factor::Shear { axis, poly } => {
                let mut coords: Vec<Polynomial> = (0..dim).map(|j| Polynomial::variable(dim, j)).collect();
                coords[*axis] = coords[*axis].add(poly);
                PolyMap::new(coords).expect("validated factor")
            }
            Factor::Overshear { axis, scale, poly } => {
                let mut coords: Vec<Polynomial> = (0..dim).map(|j| Polynomial::variable(dim, j)).collect();
                coords[*axis] = coords[*axis].scale(*scale).add(poly);
                PolyMap::new(coords).expect("validated factor")
            }
            Factor::Linear { matrix } => PolyMap::linear(matrix),
        }
    }

    fn is_shear_only(&self) -> bool {
        matches!(self, Factor::Shear { .. })
    }
}

/// Ordered list of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismWord {
    dim: usize,
    factors: Vec<Factor>,
    normalized: bool,
}

impl AutomorphismWord {
    pub fn new(dim: usize, factors: Vec<Factor>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        for f in &factors {
            f.validate(dim)?;
        }
        Ok(AutomorphismWord { dim, factors, normalized: false })
    }

    pub fn identity(dim: usize) -> Self {
        AutomorphismWord { dim, factors: Vec::new(), normalized: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// True for words produced by [`AutomorphismWord::normalize`] (and the
    /// empty word).
    pub fn is_normalized_word(&self) -> bool {
        self.normalized
    }

    pub fn is_shear_only(&self) -> bool {
        self.factors.iter().all(Factor::is_shear_only)
    }

    /// Word applying `self` first and then `next`.
    pub fn then(&self, next: &AutomorphismWord) -> Result<AutomorphismWord> {
        Error::check_dim(self.dim, next.dim)?;
        let mut factors = self.factors.clone();
        factors.extend(next.factors.iter().cloned());
        Ok(AutomorphismWord { dim: self.dim, factors, normalized: false })
    }

    /// Composite map. Errors with `DegreeCap` if an intermediate degree
    /// exceeds the composition cap.
    pub fn to_polymap(&self) -> Result<PolyMap> {
        let mut acc = PolyMap::identity(self.dim);
        for f in &self.factors {
            acc = f.to_polymap(self.dim).compose(&acc, None)?;
        }
        if self.normalized && acc.normalization_defect() <= NORMALIZATION_SNAP {
            acc.force_normalized();
        }
        Ok(acc)
    }

    pub fn inverse(&self) -> Result<AutomorphismWord> {
        let factors = self.factors.iter().rev().map(Factor::inverse).collect::<Result<Vec<_>>>()?;
        Ok(AutomorphismWord { dim: self.dim, factors, normalized: false })
    }

    /// Appends constant shears removing `Φ(0)` and the linear factor
    /// `DΦ(0)^{-1}`, so the result fixes the origin with identity derivative.
    pub fn normalize(&self) -> Result<AutomorphismWord> {
        let map = self.to_polymap()?;
        let n = self.dim;
        let mut factors = self.factors.clone();
        for (j, c) in map.constant_term().into_iter().enumerate() {
            if c != C64::new(0.0, 0.0) {
                factors.push(Factor::Shear { axis: j, poly: Polynomial::constant(n, -c) });
            }
        }
        let d = map.linear_part();
        if d != Matrix::identity(n) {
            let inv = d.inverse()?;
            factors.push(Factor::Linear { matrix: inv });
        }
        Ok(AutomorphismWord { dim: n, factors, normalized: true })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::distance;
    use crate::polymap::MultiIndex;
    use crate::sample::{random_unit_vector, seeded};
    use alloc::vec;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn z2sq(a: f64) -> Polynomial {
        Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(a))
    }

    #[test]
    fn single_shear_and_empty() {
        let w = AutomorphismWord::new(2, vec![Factor::shear(0, z2sq(0.5))]).unwrap();
        let expected = PolyMap::new(vec![Polynomial::variable(2, 0).add(&z2sq(0.5)), Polynomial::variable(2, 1)]).unwrap();
        assert_eq!(w.to_polymap().unwrap(), expected);
        assert_eq!(AutomorphismWord::identity(3).to_polymap().unwrap(), PolyMap::identity(3));
        let both = w.then(&w.inverse().unwrap()).unwrap();
        assert_eq!(both.to_polymap().unwrap(), PolyMap::identity(2));
    }

    #[test]
    fn rejects_bad_factors() {
        let own_axis = Polynomial::monomial(MultiIndex::new(vec![2, 0]), c(1.0));
        assert!(AutomorphismWord::new(2, vec![Factor::shear(0, own_axis)]).is_err());
        let singular = Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(AutomorphismWord::new(2, vec![Factor::linear(singular)]).is_err());
    }

    #[test]
    fn inverse_factors() {
        let m = Matrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 1.0]]).unwrap();
        let w = AutomorphismWord::new(
            2,
            vec![
                Factor::shear(0, z2sq(0.7)),
                Factor::linear(m.clone()),
                Factor::Overshear { axis: 1, scale: C64::new(0.5, 0.5), poly: Polynomial::monomial(MultiIndex::new(vec![3, 0]), c(0.2)) },
            ],
        )
        .unwrap();
        let inv = w.inverse().unwrap();
        assert_eq!(inv.factors().len(), 3);
        assert_eq!(inv.factors()[2], Factor::Shear { axis: 0, poly: z2sq(-0.7) });
        let f = w.to_polymap().unwrap();
        let g = inv.to_polymap().unwrap();
        let mut rng = seeded(3);
        for _ in 0..100 {
            let z = crate::linalg::scale_real(&random_unit_vector(&mut rng, 2), 0.8);
            let back = g.eval(&f.eval(&z).unwrap()).unwrap();
            assert!(distance(&back, &z) < 1e-12);
        }
    }

    #[test]
    fn normalize_translation() {
        // (z1 + 1 + a z2^2, z2)
        let p = Polynomial::constant(2, c(1.0)).add(&z2sq(0.3));
        let w = AutomorphismWord::new(2, vec![Factor::shear(0, p)]).unwrap();
        let n = w.normalize().unwrap();
        let f = n.to_polymap().unwrap();
        assert!(f.is_normalized());
        assert_eq!(f.eval(&[c(0.0), c(0.0)]).unwrap(), vec![c(0.0), c(0.0)]);
    }

    #[test]
    fn normalize_linear_word() {
        let m = Matrix::from_real_rows(&[&[3.0, 1.0], &[1.0, 2.0]]).unwrap();
        let w = AutomorphismWord::new(2, vec![Factor::linear(m)]).unwrap();
        assert_eq!(w.normalize().unwrap().to_polymap().unwrap(), PolyMap::identity(2));
        let id = AutomorphismWord::new(2, vec![Factor::shear(0, z2sq(0.3))]).unwrap();
        assert_eq!(id.normalize().unwrap().factors().len(), 1);
    }
}
