//! Property tests against independent oracles (sampling, finite differences,
//! brute-force enumeration).

use ballchain_core::automorphism::{AutomorphismWord, Factor};
use ballchain_core::catalog;
use ballchain_core::criteria::{
    convexity_test, g_starlike_test, ktilde_test, q_class_test, qtilde_test, CriterionSpec, GRegion,
};
use ballchain_core::linalg::{distance, inner, norm, scale_real, Matrix};
use ballchain_core::loewner::{flow, FlowOptions, HerglotzField, Piece};
use ballchain_core::operator::{matrix_exp, numerical_range_extrema, operator_profile, Operator, TAU_LIN};
use ballchain_core::polymap::{
    dilation_factor, sup_norm_on_sphere, MultiIndex, NormBudget, PolyMap, Polynomial,
};
use ballchain_core::resonance::detect_resonance;
use ballchain_core::sample::{gaussian_vector, make_sample, random_unit_vector, seeded, Rng, DEFAULT_RADII};
use ballchain_core::C64;
use proptest::prelude::*;

fn random_operator(rng: &mut Rng, n: usize) -> Operator {
    let rows: Vec<Vec<C64>> = (0..n).map(|_| gaussian_vector(rng, n)).collect();
    Operator::from_rows(&rows).unwrap()
}

/// Random map of degree `<= deg`, with a nonzero linear part.
fn random_map(rng: &mut Rng, n: usize, deg: u32, terms: usize) -> PolyMap {
    let coords = (0..n)
        .map(|i| {
            let mut p = Polynomial::variable(n, i);
            for _ in 0..terms {
                let d = 2 + (rand_index(rng, deg as usize - 1) as u32);
                let all: Vec<MultiIndex> = MultiIndex::all_of_degree(n, d).collect();
                let mi = all[rand_index(rng, all.len())].clone();
                let c = gaussian_vector(rng, 1)[0] * 0.3;
                p = p.add(&Polynomial::monomial(mi, c));
            }
            p
        })
        .collect();
    PolyMap::new(coords).unwrap()
}

fn rand_index(rng: &mut Rng, len: usize) -> usize {
    let g = gaussian_vector(rng, 1)[0];
    ((g.re.abs() * 7919.0 + g.im.abs() * 104729.0) as usize) % len
}

fn ball_point(rng: &mut Rng, n: usize, r: f64) -> Vec<C64> {
    scale_real(&random_unit_vector(rng, n), r)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn inequality_chain(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed);
        let a = random_operator(&mut rng, n);
        let p = operator_profile(&a).unwrap();
        prop_assert!(p.chain_violation() <= TAU_LIN, "{:?}", p);
        prop_assert!(p.m <= p.kminus + TAU_LIN && p.kminus <= p.kplus + TAU_LIN);
    }

    #[test]
    fn numerical_range_vs_sampling(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed);
        let a = random_operator(&mut rng, n);
        let (m, k) = numerical_range_extrema(&a);
        for _ in 0..2000 {
            let z = random_unit_vector(&mut rng, n);
            let v = inner(&a.apply(&z), &z).re;
            prop_assert!(v >= m - 1e-12 && v <= k + 1e-12);
        }
    }

    #[test]
    fn exp_semigroup(seed in any::<u64>(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
        let mut rng = seeded(seed);
        let a = Operator::new(random_operator(&mut rng, 2).matrix().scaled(C64::new(0.3, 0.0))).unwrap();
        let e0 = matrix_exp(&a, 0.0).unwrap();
        prop_assert!(e0.matrix().max_abs_diff(&Matrix::identity(2)) <= 1e-14);
        let lhs = matrix_exp(&a, s + t).unwrap();
        let rhs = matrix_exp(&a, s).unwrap().matrix().mul(matrix_exp(&a, t).unwrap().matrix());
        let scale = lhs.matrix().norm_frobenius().max(1.0);
        prop_assert!(lhs.matrix().max_abs_diff(&rhs) <= 1e-10 * scale);
    }

    #[test]
    fn growth_exp(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let base = random_operator(&mut rng, 2);
        let (m0, _) = numerical_range_extrema(&base);
        // Shift so that m(A) > 0.
        let a = Operator::new(base.matrix().add(&Matrix::identity(2).scaled(C64::new(0.5 - m0, 0.0)))).unwrap();
        let (m, k) = numerical_range_extrema(&a);
        for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let e = matrix_exp(&a, t).unwrap();
            for _ in 0..10 {
                let u = random_unit_vector(&mut rng, 2);
                let g = norm(&e.apply(&u));
                prop_assert!(g >= (m * t).exp() * (1.0 - 1e-9));
                prop_assert!(g <= (k * t).exp() * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn compose_matches_evaluation(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed);
        let f = random_map(&mut rng, n, 3, 3);
        let g = random_map(&mut rng, n, 3, 3);
        let h = f.compose(&g, None).unwrap();
        for _ in 0..20 {
            let z = ball_point(&mut rng, n, 0.7);
            let a = h.eval(&z).unwrap();
            let b = f.eval(&g.eval(&z).unwrap()).unwrap();
            prop_assert!(distance(&a, &b) <= 1e-12 * (1.0 + norm(&b)));
        }
    }

    #[test]
    fn derivatives_match_finite_differences(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = seeded(seed);
        let f = random_map(&mut rng, n, 5, 3);
        let z = ball_point(&mut rng, n, 0.6);
        let v = random_unit_vector(&mut rng, n);
        let j = f.jacobian(&z).unwrap();
        // Holomorphic: directional derivative along any complex direction e_k.
        let h = 1e-6;
        for k in 0..n {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            let fp = f.eval(&zp).unwrap();
            let fm = f.eval(&zm).unwrap();
            for i in 0..n {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                prop_assert!((fd - j[(i, k)]).norm() <= 1e-8);
            }
        }
        let h2 = 1e-4;
        let shift = |s: f64| -> Vec<C64> { z.iter().zip(&v).map(|(a, b)| a + b * s).collect() };
        let fp = f.eval(&shift(h2)).unwrap();
        let f0 = f.eval(&z).unwrap();
        let fm = f.eval(&shift(-h2)).unwrap();
        let d2 = f.second_derivative(&z, &v).unwrap();
        for i in 0..n {
            let fd = (fp[i] - f0[i] * 2.0 + fm[i]) / (h2 * h2);
            prop_assert!((fd - d2[i]).norm() <= 1e-6 * (1.0 + d2[i].norm()));
        }
    }

    #[test]
    fn dilation_scales_by_degree(seed in any::<u64>(), r in 0.01f64..1.0) {
        let mut rng = seeded(seed);
        let f = random_map(&mut rng, 2, 5, 4);
        let g = f.dilate(r).unwrap();
        prop_assert!(g.is_normalized());
        for (pf, pg) in f.coords().iter().zip(g.coords()) {
            for (mi, c) in pf.terms() {
                prop_assert_eq!(pg.coefficient(mi), c * dilation_factor(r, mi.degree()));
            }
        }
        for _ in 0..5 {
            let z = ball_point(&mut rng, 2, 0.8);
            let direct = scale_real(&f.eval(&scale_real(&z, r)).unwrap(), 1.0 / r);
            prop_assert!(distance(&direct, &g.eval(&z).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn homogeneous_reconstruction(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = random_map(&mut rng, 2, 4, 4);
        let budget = NormBudget { samples: 200, restarts: 4, ..NormBudget::default() };
        let exp = f.homogeneous_parts(&budget).unwrap();
        prop_assert_eq!(exp.reconstruct(), f);
        for p in &exp.parts {
            prop_assert_eq!(p.map.homogeneous_part(p.degree), p.map.clone());
        }
    }

    #[test]
    fn word_inverse_and_jacobian_determinant(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut factors = Vec::new();
        for i in 0..3 {
            let axis = i % 2;
            let mut e = vec![0, 0];
            e[1 - axis] = 2 + (i as u32 % 2);
            let c = gaussian_vector(&mut rng, 1)[0] * 0.3;
            factors.push(Factor::shear(axis, Polynomial::monomial(MultiIndex::new(e), c)));
        }
        let w = AutomorphismWord::new(2, factors).unwrap();
        let f = w.to_polymap().unwrap();
        let g = w.inverse().unwrap().to_polymap().unwrap();
        for _ in 0..100 {
            let z = ball_point(&mut rng, 2, 0.5);
            prop_assert!(distance(&g.eval(&f.eval(&z).unwrap()).unwrap(), &z) <= 1e-12);
            let det = f.jacobian(&z).unwrap().determinant();
            prop_assert!((det - C64::new(1.0, 0.0)).norm() <= 1e-10);
        }
        let n = w.normalize().unwrap().to_polymap().unwrap();
        prop_assert!(n.is_normalized());
    }

    #[test]
    fn norm_estimate_monotone_in_budget(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let f = random_map(&mut rng, 2, 3, 3).homogeneous_part(3);
        let mut prev = 0.0;
        for samples in [10, 100, 1000] {
            let b = NormBudget { samples, restarts: 5, iterations: 50, seed: 1 };
            let est = sup_norm_on_sphere(&f, 1.0, &b);
            prop_assert!(est.sampled >= prev);
            prop_assert!(est.value >= est.sampled);
            prev = est.sampled;
        }
    }
}

/// Brute-force oracle for two eigenvalues: `λ_s = m1 λ1 + m2 λ2`.
fn brute_force_resonant(l: [f64; 2], bound: u32) -> bool {
    for d in 2..=bound {
        for m1 in 0..=d {
            let m2 = d - m1;
            let combo = m1 as f64 * l[0] + m2 as f64 * l[1];
            if l.iter().any(|&ls| (ls - combo).abs() <= 1e-9 * (1.0 + ls.abs())) {
                return true;
            }
        }
    }
    false
}

#[test]
fn resonance_against_brute_force() {
    let qs = [0.5, 1.0 / 3.0, 2.0, 3.0, 4.0, 2.5, 3.5, std::f64::consts::E, 0.7, 1.3, 5.0, 0.25];
    for lambda in [0.3, 1.0, 2.2] {
        for &q in &qs {
            let l = [lambda, q * lambda];
            let v = detect_resonance(&[C64::new(l[0], 0.0), C64::new(l[1], 0.0)], 1e-9).unwrap();
            assert_eq!(v.is_resonant(), brute_force_resonant(l, v.search_bound), "lambda={lambda} q={q}");
            let integer_ratio = |x: f64| x >= 2.0 - 1e-12 && (x - x.round()).abs() < 1e-12;
            assert_eq!(v.is_resonant(), integer_ratio(q) || integer_ratio(1.0 / q), "q={q}");
        }
    }
}

#[test]
fn word_injective_on_pairs() {
    let w = catalog::shear_word(0.7).then(&catalog::shear_word_on(1, -0.4)).unwrap();
    let f = w.to_polymap().unwrap();
    let mut rng = seeded(99);
    for _ in 0..10_000 {
        let a = ball_point(&mut rng, 2, 0.9);
        let b = ball_point(&mut rng, 2, 0.9);
        if distance(&a, &b) > 1e-9 {
            assert!(distance(&f.eval(&a).unwrap(), &f.eval(&b).unwrap()) > 0.0);
        }
    }
}

#[test]
fn class_chain_and_convex_order_half() {
    let b = NormBudget::default();
    let s = make_sample(2, &DEFAULT_RADII, 200, 2, 4).unwrap();
    for f in catalog::ktilde_examples().into_iter().filter(|f| f.dim() == 2) {
        assert!(ktilde_test(&f, &b).unwrap().is_ok());
        assert!(qtilde_test(&f, &b).unwrap().min_margin >= 0.5 - 1e-12);
        assert!(q_class_test(&f, &s).unwrap().is_ok());
    }
    for f in catalog::convex_examples() {
        assert!(convexity_test(&f, &s).unwrap().is_ok());
        assert!(g_starlike_test(&f, &GRegion::Disk { alpha: 0.5 }, &s).unwrap().is_ok());
    }
}

#[test]
fn dilation_stability_of_examples() {
    let b = NormBudget::default();
    for e in catalog::class_examples() {
        let s = make_sample(e.map.dim(), &DEFAULT_RADII, 60, 2, 8).unwrap();
        for r in [0.5, 0.75, 0.9] {
            let phi = e.map.dilate(r).unwrap();
            let child = e.spec.evaluate(&phi, &s, &b).unwrap();
            assert!(child.is_ok(), "{} at r={r}", e.name);
            let parent_sample = if e.spec.is_sampled() { s.scaled(r) } else { s.clone() };
            let parent = e.spec.evaluate(&e.map, &parent_sample, &b).unwrap();
            assert!(child.min_margin >= parent.min_margin - 1e-12, "{} at r={r}", e.name);
        }
    }
    let _ = CriterionSpec::Starlike;
}

#[test]
fn linear_flow_exact_and_norm_decay() {
    let a = catalog::ex3r_operator();
    let field = HerglotzField::new(a.clone(), vec![Piece::linear(2.0), Piece::spirallike(1.0, catalog::shear_map(0.1))]).unwrap();
    let mut rng = seeded(17);
    let opts = FlowOptions { record_trajectory: true, ..FlowOptions::default() };
    for _ in 0..20 {
        let z = ball_point(&mut rng, 2, 0.9);
        let v = flow(&field, &z, 0.0, 2.0, &opts).unwrap();
        let exact = matrix_exp(&a, -2.0).unwrap().apply(&z);
        assert!(distance(&v.value, &exact) <= 1e-9);
        let full = flow(&field, &z, 0.0, 3.0, &opts).unwrap();
        assert!(full.max_norm_increase() <= 1e-9);
        assert!(norm(&full.value) <= norm(&z));
    }
}
