//! Built-in operators, maps, words and fields with known properties.

use alloc::vec;
use alloc::vec::Vec;

use crate::automorphism::{AutomorphismWord, Factor};
use crate::criteria::{CriterionSpec, GRegion};
use crate::loewner::{HerglotzField, Piece};
use crate::operator::Operator;
use crate::polymap::{MultiIndex, PolyMap, Polynomial};
use crate::{Result, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `α = (1 - √5)/4`.
pub fn ex3r_alpha() -> f64 {
    (1.0 - libm::sqrt(5.0)) / 4.0
}

/// `[[1 - 2α, 1], [0, 1/2 - 2α]]`: nonresonant with `k₊ = 2m`.
pub fn ex3r_operator() -> Operator {
    let a = ex3r_alpha();
    Operator::from_real_rows(&[&[1.0 - 2.0 * a, 1.0], &[0.0, 0.5 - 2.0 * a]]).expect("finite")
}

/// `diag(1, q)`.
pub fn diag_operator(q: f64) -> Operator {
    Operator::diagonal(&[1.0, q]).expect("finite")
}

/// Polynomial `a z_j^2` in two variables, `j` being the other axis.
fn square_of_other(axis: usize, a: f64) -> Polynomial {
    let mut e = vec![0, 0];
    e[1 - axis] = 2;
    Polynomial::monomial(MultiIndex::new(e), c(a))
}

/// Word `z_axis += a z_other^2` in `C^2`.
pub fn shear_word_on(axis: usize, a: f64) -> AutomorphismWord {
    AutomorphismWord::new(2, vec![Factor::shear(axis, square_of_other(axis, a))]).expect("valid shear")
}

/// `(z1 + a z2^2, z2)` as a word.
pub fn shear_word(a: f64) -> AutomorphismWord {
    shear_word_on(0, a)
}

/// `(z1 + a z2^2, z2)`.
pub fn shear_map(a: f64) -> PolyMap {
    shear_word(a).to_polymap().expect("degree 2")
}

/// `z + c (z1^2, 0)`.
pub fn quadratic_map(cf: f64) -> PolyMap {
    PolyMap::new(vec![
        Polynomial::variable(2, 0).add(&Polynomial::monomial(MultiIndex::new(vec![2, 0]), c(cf))),
        Polynomial::variable(2, 1),
    ])
    .expect("dimension 2")
}

/// `z + (a z1^2 + b z1 z2, b z2^2)` in `C^2`.
pub fn mixed_map(a: f64, b: f64) -> PolyMap {
    PolyMap::new(vec![
        Polynomial::variable(2, 0)
            .add(&Polynomial::monomial(MultiIndex::new(vec![2, 0]), c(a)))
            .add(&Polynomial::monomial(MultiIndex::new(vec![1, 1]), c(b))),
        Polynomial::variable(2, 1).add(&Polynomial::monomial(MultiIndex::new(vec![0, 2]), c(b))),
    ])
    .expect("dimension 2")
}

/// `(z1 + a z2^2 + b z2^3, z2, z3 + a z1 z2)` in `C^3`.
pub fn cubic_map3(a: f64, b: f64) -> PolyMap {
    PolyMap::new(vec![
        Polynomial::variable(3, 0)
            .add(&Polynomial::monomial(MultiIndex::new(vec![0, 2, 0]), c(a)))
            .add(&Polynomial::monomial(MultiIndex::new(vec![0, 3, 0]), c(b))),
        Polynomial::variable(3, 1),
        Polynomial::variable(3, 2).add(&Polynomial::monomial(MultiIndex::new(vec![1, 1, 0]), c(a))),
    ])
    .expect("dimension 3")
}

/// A named map expected to satisfy `spec`.
#[derive(Debug, Clone)]
pub struct ClassExample {
    pub name: &'static str,
    pub map: PolyMap,
    pub spec: CriterionSpec,
}

fn ex(name: &'static str, map: PolyMap, spec: CriterionSpec) -> ClassExample {
    ClassExample { name, map, spec }
}

/// Members of `K~` (`sum k^2 ||A_k|| <= 1`, strictly).
pub fn ktilde_examples() -> Vec<PolyMap> {
    vec![quadratic_map(0.2), shear_map(0.2), mixed_map(0.1, 0.05), cubic_map3(0.1, 0.02), PolyMap::identity(2)]
}

/// Members of `Q~` (`sum k ||A_k|| <= 1`) that are not all in `K~`.
pub fn qtilde_examples() -> Vec<PolyMap> {
    let mut v = ktilde_examples();
    v.extend([quadratic_map(0.4), shear_map(0.45), mixed_map(0.2, 0.1), cubic_map3(0.2, 0.1)]);
    v
}

/// One passing example per criterion (several for some).
pub fn class_examples() -> Vec<ClassExample> {
    let diag12 = diag_operator(2.0);
    vec![
        ex("starlike shear a=0.5", shear_map(0.5), CriterionSpec::Starlike),
        ex("starlike quadratic c=0.4", quadratic_map(0.4), CriterionSpec::Starlike),
        ex("spirallike diag(1,2) shear a=0.1", shear_map(0.1), CriterionSpec::Spirallike(diag12)),
        ex("spirallike ex3r shear a=0.1", shear_map(0.1), CriterionSpec::Spirallike(ex3r_operator())),
        ex("g-starlike half-plane shear a=0.3", shear_map(0.3), CriterionSpec::GStarlike(GRegion::HalfPlane)),
        ex("g-starlike disk 1/2 shear a=0.2", shear_map(0.2), CriterionSpec::GStarlike(GRegion::Disk { alpha: 0.5 })),
        ex("g-starlike sector 1/2 shear a=0.3", shear_map(0.3), CriterionSpec::GStarlike(GRegion::Sector { alpha: 0.5 })),
        ex("convex shear a=0.4", shear_map(0.4), CriterionSpec::Convex),
        ex("convex quadratic c=0.2", quadratic_map(0.2), CriterionSpec::Convex),
        ex("q-class quadratic c=0.4", quadratic_map(0.4), CriterionSpec::QClass),
        ex("q-class shear a=0.45", shear_map(0.45), CriterionSpec::QClass),
        ex("qtilde quadratic c=0.4", quadratic_map(0.4), CriterionSpec::QTilde),
        ex("qtilde mixed", mixed_map(0.2, 0.1), CriterionSpec::QTilde),
        ex("ktilde quadratic c=0.2", quadratic_map(0.2), CriterionSpec::KTilde),
        ex("ktilde cubic n=3", cubic_map3(0.1, 0.02), CriterionSpec::KTilde),
    ]
}

/// Convex examples, also expected to be starlike of order 1/2.
pub fn convex_examples() -> Vec<PolyMap> {
    vec![shear_map(0.4), quadratic_map(0.2), shear_map(0.1), PolyMap::identity(2)]
}

/// Named Herglotz fields.
pub fn builtin_fields() -> Result<Vec<(&'static str, HerglotzField)>> {
    let id = Operator::identity(2);
    Ok(vec![
        ("linear identity", HerglotzField::linear(id.clone(), 2.0)?),
        ("linear ex3r", HerglotzField::linear(ex3r_operator(), 1.0)?),
        (
            "shear then linear",
            HerglotzField::new(id.clone(), vec![Piece::spirallike(1.0, shear_map(0.3)), Piece::linear(1.0)])?,
        ),
        (
            "two shears",
            HerglotzField::new(
                id,
                vec![
                    Piece::spirallike(0.5, shear_map(0.3)),
                    Piece::spirallike(0.5, shear_word_on(1, 0.2).to_polymap()?),
                    Piece::linear(0.5),
                ],
            )?,
        ),
        ("spirallike diag(1,2)", HerglotzField::new(diag_operator(2.0), vec![Piece::spirallike(1.0, shear_map(0.1))])?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymap::NormBudget;
    use crate::sample::{make_sample, DEFAULT_RADII};

    #[test]
    fn examples_pass_their_criteria() {
        let b = NormBudget::default();
        for e in class_examples() {
            let s = make_sample(e.map.dim(), &DEFAULT_RADII, 100, 2, 21).unwrap();
            let rep = e.spec.evaluate(&e.map, &s, &b).unwrap();
            assert!(rep.is_ok(), "{}: {}", e.name, rep.summary());
        }
    }

    #[test]
    fn fields_build() {
        assert_eq!(builtin_fields().unwrap().len(), 5);
    }
}
