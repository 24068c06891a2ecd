use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trigint::model::FrequencySystem;
use trigint::resonance::{
    analyze, canonical_count, detect_gap, in_module, l1_norm, modify_frequencies, module_basis, sine_combinations,
};

fn fast_system(omegas: &[f64]) -> FrequencySystem {
    let mut dims = vec![0];
    dims.extend(std::iter::repeat_n(1, omegas.len()));
    let mut w = vec![0.0];
    w.extend_from_slice(omegas);
    FrequencySystem::new(dims, w).unwrap()
}

/// Integer span of `gens` found by walking `+-g` steps inside `[-bound, bound]^dim`.
fn walk_span(dim: usize, gens: &[Vec<i64>], bound: i64) -> HashSet<Vec<i64>> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let origin = vec![0i64; dim];
    seen.insert(origin.clone());
    queue.push_back(origin);
    while let Some(v) = queue.pop_front() {
        for g in gens {
            for s in [1, -1] {
                let w: Vec<i64> = v.iter().zip(g).map(|(a, b)| a + s * b).collect();
                if w.iter().all(|x| x.abs() <= bound) && seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
    }
    seen
}

fn box_points(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..dim {
        pts = pts.into_iter().flat_map(|p| (-r..=r).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    pts
}

fn generator_sets() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..=3).prop_flat_map(|dim| (Just(dim), prop::collection::vec(prop::collection::vec(-2i64..=2, dim), 1..=3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn membership_matches_integer_span((dim, gens) in generator_sets()) {
        let module = module_basis(dim, &gens);
        let span = walk_span(dim, &gens, 8);
        for k in box_points(dim, 3) {
            prop_assert_eq!(in_module(&k, &module), span.contains(&k), "k = {:?}, gens = {:?}", k, gens);
        }
    }

    #[test]
    fn basis_is_idempotent_and_contains_generators((dim, gens) in generator_sets()) {
        let m = module_basis(dim, &gens);
        let again = module_basis(dim, m.basis());
        prop_assert_eq!(again.basis(), m.basis());
        for g in &gens {
            prop_assert!(in_module(g, &m));
        }
        prop_assert!(m.rank() <= dim);
    }

    #[test]
    fn sine_values_cover_every_canonical_vector(
        omegas in prop::collection::vec(10.0f64..1000.0, 1..=3),
        n in 1u32..=3,
        log_h in -3.0f64..-1.0,
    ) {
        let f = fast_system(&omegas);
        let h = 10f64.powf(log_h);
        let c = sine_combinations(&f, h, n).unwrap();
        prop_assert_eq!(c.len() as u128, canonical_count(omegas.len(), n + 1));
        for s in &c {
            prop_assert!((0.0..=1.0).contains(&s.value));
            prop_assert!(s.norm >= 1 && s.norm <= n + 1 && s.norm == l1_norm(&s.k));
            prop_assert!(*s.k.iter().find(|&&x| x != 0).unwrap() > 0);
        }
    }

    #[test]
    fn gap_window_is_empty(
        omegas in prop::collection::vec(10.0f64..1000.0, 1..=3),
        n in 1u32..=3,
        log_h in -3.0f64..-1.0,
        delta in 0.05f64..=0.25,
    ) {
        let f = fast_system(&omegas);
        let h = 10f64.powf(log_h);
        let c = sine_combinations(&f, h, n).unwrap();
        let g = detect_gap(&c, h, delta, n, omegas.len()).unwrap();
        prop_assert!(c.iter().all(|s| !g.contains(s.value)));
        prop_assert!(g.alpha >= delta / 2.0 && g.alpha <= delta);
    }

    #[test]
    fn modified_frequencies_pass_verification_under_assumption_a(
        omegas in prop::collection::vec(10.0f64..1000.0, 1..=3),
        n in 1u32..=3,
        log_h in -3.0f64..-1.0,
    ) {
        let f = fast_system(&omegas);
        let a = analyze(&f, 10f64.powf(log_h), n, 0.25).unwrap();
        if a.assumption_a {
            prop_assert!(a.verification.passed(), "{:?}", a.verification);
        }
    }
}

#[test]
fn all_exact_resonances_span_the_full_lattice() {
    // h/2 k.w = pi (k1 + 2 k2): every combination is an exact resonance
    let f = fast_system(&[std::f64::consts::PI * 4.0, std::f64::consts::PI * 8.0]);
    let a = analyze(&f, 0.5, 1, 0.25).unwrap();
    assert_eq!(a.module().rank(), 2);
    assert_eq!(a.module().basis(), &[vec![1, 0], vec![0, 1]]);
}

/// Null-space projector of the basis matrix `K`: `I - K^T (K K^T)^{-1} K`.
fn null_projector(basis: &[Vec<i64>], ell: usize) -> DMatrix<f64> {
    let k = DMatrix::from_fn(basis.len(), ell, |i, j| basis[i][j] as f64);
    let kkt = &k * k.transpose();
    let inv = kkt.try_inverse().unwrap();
    DMatrix::identity(ell, ell) - k.transpose() * inv * k
}

#[test]
fn correction_has_minimal_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..40 {
        let ell = 3;
        let rows = 1 + trial % 2;
        let basis = loop {
            let b: Vec<Vec<i64>> = (0..rows).map(|_| (0..ell).map(|_| rng.gen_range(-3..=3)).collect()).collect();
            let m = module_basis(ell, &b);
            if m.rank() == rows {
                break m;
            }
        };
        let omegas: Vec<f64> = (0..ell).map(|_| rng.gen_range(10.0..500.0)).collect();
        let f = fast_system(&omegas);
        let h = 0.01;
        let c = sine_combinations(&f, h, 1).unwrap();
        let gap = detect_gap(&c, h, 0.25, 1, ell).unwrap();
        let mf = modify_frequencies(&f, h, &basis, &gap).unwrap();
        let theta = DVector::from_column_slice(&mf.theta);
        let proj = null_projector(basis.basis(), ell);

        // theta lies in the row space of K
        assert!((&proj * &theta).norm() <= 1e-9 * theta.norm().max(1.0));
        for _ in 0..1000 {
            let v = DVector::from_fn(ell, |_, _| rng.gen_range(-1.0..1.0));
            let z = &proj * v;
            let alt = &theta + &z;
            assert!(theta.norm() <= alt.norm() + 1e-12, "trial {trial}");
        }
    }
}
