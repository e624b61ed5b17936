//! Cross-module property tests: action laws on random inputs, algebra
//! relations on random elements, and generator invariants of the spin
//! apparatus.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsorbits_core::casemods::{build_case, CaseName};
use tsorbits_core::clifford::{
    self, d5_root_element, spin_matrix, v10_quadspace, CliffordElem, Spinor,
};
use tsorbits_core::gf::{FieldElem, FieldSpec};
use tsorbits_core::lietype;
use tsorbits_core::linalg::{act, Mat, Subspace};

fn gf(q: u64) -> Arc<FieldSpec> {
    FieldSpec::for_order(q).unwrap()
}

fn random_invertible(rng: &mut ChaCha8Rng, spec: &Arc<FieldSpec>, n: usize) -> Mat {
    loop {
        let m = Mat::from_fn(spec.clone(), n, n, |_, _| {
            spec.elem(rng.gen_range(0..spec.order())).unwrap()
        });
        if m.is_invertible() {
            return m;
        }
    }
}

fn random_subspace(rng: &mut ChaCha8Rng, spec: &Arc<FieldSpec>, n: usize, k: usize) -> Subspace {
    loop {
        let rows: Vec<Vec<FieldElem>> = (0..k)
            .map(|_| {
                (0..n)
                    .map(|_| spec.elem(rng.gen_range(0..spec.order())).unwrap())
                    .collect()
            })
            .collect();
        if let Ok(s) = Subspace::canonicalize(spec.clone(), n, &rows) {
            if s.dim() == k {
                return s;
            }
        }
    }
}

#[test]
fn canonicalize_is_a_class_function() {
    // shuffled spanning sets of g.s canonicalize to act(g, s)
    let spec = gf(3);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..1000 {
        let g = random_invertible(&mut rng, &spec, 5);
        let s = random_subspace(&mut rng, &spec, 5, 2);
        let gs = act(&g, &s).unwrap();
        // spanning set: random invertible combinations of the image basis
        let a = spec.elem(rng.gen_range(1..3)).unwrap();
        let b = spec.elem(rng.gen_range(0..3)).unwrap();
        let r0: Vec<FieldElem> = gs.basis_row(0).to_vec();
        let r1: Vec<FieldElem> = gs.basis_row(1).to_vec();
        let mixed: Vec<FieldElem> = (0..5)
            .map(|i| spec.add(spec.mul(a, r1[i]), spec.mul(b, r0[i])))
            .collect();
        let shuffled = vec![mixed, r0.clone()];
        let re = Subspace::canonicalize(spec.clone(), 5, &shuffled).unwrap();
        if a != FieldElem::ZERO {
            assert_eq!(re, gs);
        }
    }
}

#[test]
fn action_inverse_roundtrip_q3_n7() {
    let m = build_case(CaseName::A2Adjoint, 3).unwrap();
    let spec = m.spec.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let g = random_invertible(&mut rng, &spec, 7);
        let ginv = g.inverse().unwrap();
        let s = random_subspace(&mut rng, &spec, 7, 2);
        assert_eq!(act(&ginv, &act(&g, &s).unwrap()).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn act_composes(seed in 0u64..1u64 << 48) {
        let spec = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_invertible(&mut rng, &spec, 5);
        let h = random_invertible(&mut rng, &spec, 5);
        let s = random_subspace(&mut rng, &spec, 5, 2);
        let lhs = act(&g, &act(&h, &s).unwrap()).unwrap();
        let rhs = act(&g.mul(&h).unwrap(), &s).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn packed_key_is_injective_on_enumeration(n in 2usize..5, q in prop::sample::select(vec![2u64, 3, 4])) {
        let spec = gf(q);
        let k = 2.min(n - 1).max(1);
        let mut seen = std::collections::HashSet::new();
        for s in tsorbits_core::linalg::enumerate_k_subspaces(n, k, spec).unwrap() {
            prop_assert!(seen.insert(s.packed_key()));
        }
    }
}

#[test]
fn clifford_v_squared_is_q_on_random_vectors() {
    let spec = gf(3);
    let qs = v10_quadspace(spec.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let coords: Vec<FieldElem> = (0..10)
            .map(|_| spec.elem(rng.gen_range(0..3)).unwrap())
            .collect();
        let mut v = CliffordElem::zero(spec.clone());
        for (i, &c) in coords.iter().enumerate() {
            v = v.add(&CliffordElem::monomial(spec.clone(), 1 << i, c));
        }
        let sq = v.mul(&v);
        let expected = qs.q_value(&coords);
        assert_eq!(sq.coeff(0), expected);
        assert!(sq.terms().all(|(m, _)| m == 0), "v^2 is scalar");
    }
}

#[test]
fn spin_generators_fix_the_fixed_vector() {
    // every generator of the spin16 module fixes e4 + f4 in the vector
    // representation, exactly
    for q in [2u64, 3] {
        let spec = gf(q);
        let basis_t = spec.power_basis();
        let mut fixed = vec![FieldElem::ZERO; 10];
        fixed[3] = FieldElem::ONE;
        fixed[8] = FieldElem::ONE;
        let allowed = [1usize, 2, 3, 5, 6, 7, 8, 10];
        // (a) root elements avoiding {4, 9}
        for (ai, &i) in allowed.iter().enumerate() {
            for &j in &allowed[ai + 1..] {
                if j - i == 5 {
                    continue;
                }
                for &t in &basis_t {
                    let m = clifford::vector_rep(spec.clone(), i, j, t).unwrap();
                    assert_eq!(m.mul_vec(&fixed).unwrap(), fixed, "x_{{{i},{j}}}");
                }
            }
        }
        // (b) mixed elements via algebra conjugation
        for &u in &allowed {
            let t = spec.primitive();
            let ue = CliffordElem::generator(spec.clone(), u);
            let e4 = CliffordElem::generator(spec.clone(), 4);
            let f4 = CliffordElem::generator(spec.clone(), 9);
            let w = e4.add(&f4.scale(spec.fe(-1)));
            let s = CliffordElem::one(spec.clone()).add(&ue.mul(&w).scale(t));
            let s_inv = CliffordElem::one(spec.clone()).add(&ue.mul(&w).scale(spec.neg(t)));
            assert_eq!(s.mul(&s_inv), CliffordElem::one(spec.clone()));
            let fixed_elem = e4.add(&f4);
            assert_eq!(s.mul(&fixed_elem).mul(&s_inv), fixed_elem, "u={u}");
        }
    }
}

#[test]
fn spin_tables_reps_stay_totally_singular_under_generators() {
    // bundled representatives are totally singular and remain so under the
    // module's generator action
    let module = build_case(CaseName::Spin16, 2).unwrap();
    let table = lietype::bundled_table("b4").unwrap();
    for row in &table.rows {
        let Some(rep) = &row.rep else { continue };
        let s = module.subspace(rep).unwrap();
        assert!(module.space.is_totally_singular(&s), "row {}", row.label);
        for g in &module.generators {
            let img = act(g, &s).unwrap();
            assert!(
                module.space.is_totally_singular(&img),
                "row {} moved off the singular locus",
                row.label
            );
        }
    }
}

#[test]
fn mixed_spin_elements_are_in_the_spin_group() {
    // reversal check s s' = 1 for the mixed generators over GF(3)
    let spec = gf(3);
    let allowed = [1usize, 2, 3, 5, 6, 7, 8, 10];
    for &u in &allowed {
        let t = spec.fe(2);
        let ue = CliffordElem::generator(spec.clone(), u);
        let e4 = CliffordElem::generator(spec.clone(), 4);
        let f4 = CliffordElem::generator(spec.clone(), 9);
        let w = e4.add(&f4.scale(spec.fe(-1)));
        let s = CliffordElem::one(spec.clone()).add(&ue.mul(&w).scale(t));
        assert!(s.is_even());
        assert_eq!(s.mul(&s.reverse()), CliffordElem::one(spec.clone()));
    }
}

#[test]
fn spin_action_is_multiplicative() {
    // rho(ab) = rho(a) rho(b) on random even-group elements
    let spec = gf(3);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let pairs: Vec<(usize, usize)> = (1..=10usize)
        .flat_map(|i| (i + 1..=10).map(move |j| (i, j)))
        .filter(|(i, j)| j - i != 5)
        .collect();
    for _ in 0..50 {
        let (i1, j1) = pairs[rng.gen_range(0..pairs.len())];
        let (i2, j2) = pairs[rng.gen_range(0..pairs.len())];
        let t1 = spec.elem(rng.gen_range(1..3)).unwrap();
        let t2 = spec.elem(rng.gen_range(1..3)).unwrap();
        let a = d5_root_element(&spec, i1, j1, t1);
        let b = d5_root_element(&spec, i2, j2, t2);
        let ma = spin_matrix(&a).unwrap();
        let mb = spin_matrix(&b).unwrap();
        let mab = spin_matrix(&a.mul(&b)).unwrap();
        assert_eq!(ma.mul(&mb).unwrap(), mab);
    }
}

#[test]
fn spinor_identification_with_half_spin_basis() {
    // the 16 coordinates split 1 + 10 + 5 by degree
    let counts: Vec<usize> = [0u32, 2, 4]
        .iter()
        .map(|&d| {
            clifford::SPINOR_BASIS
                .iter()
                .filter(|m| m.count_ones() == d)
                .count()
        })
        .collect();
    assert_eq!(counts, vec![1, 10, 5]);
    // unit spinors round-trip through the action of 1
    let spec = gf(2);
    let one = CliffordElem::one(spec);
    for i in 0..16 {
        assert_eq!(
            clifford::spin_action(&one, &Spinor::unit(i)).unwrap(),
            Spinor::unit(i)
        );
    }
}
