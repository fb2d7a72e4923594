mod common;

use common::{random_circuit, random_state};
use entfilter::elements::{
    compose_circuit, element_unitary, DetectorBinding, DetectorModel, HeraldSpec,
};
use entfilter::engine::{evolve, herald};
use entfilter::fock::{apply_mode_unitary, FockState};
use entfilter::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evolution_preserves_norm(seed in any::<u64>(), paths in 2usize..=5, photons in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, paths, 2, 10);
        let psi = random_state(&mut rng, circuit.registry(), photons, 4);
        let out = evolve(&psi, &circuit).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn evolution_is_linear(seed in any::<u64>(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, 4, 1, 8);
        let reg = circuit.registry().clone();
        let u = compose_circuit(&circuit).unwrap();
        let a = random_state(&mut rng, &reg, 3, 3);
        let b = random_state(&mut rng, &reg, 3, 3);
        let (alpha, beta) = (C64::new(re, im), C64::new(0.5, -1.0));
        let lhs = apply_mode_unitary(&FockState::linear_combination(&[(alpha, &a), (beta, &b)]).unwrap(), &u).unwrap();
        let ua = apply_mode_unitary(&a, &u).unwrap();
        let ub = apply_mode_unitary(&b, &u).unwrap();
        let rhs = FockState::linear_combination(&[(alpha, &ua), (beta, &ub)]).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn composition_matches_sequential_application(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = random_circuit(&mut rng, 4, 2, 6);
        let second_elements = random_circuit(&mut rng, 4, 2, 6).elements().to_vec();
        let joined = first.with_appended(second_elements.clone()).unwrap();
        let second = entfilter::elements::Circuit::new(first.registry().clone(), second_elements, vec![]).unwrap();
        let psi = random_state(&mut rng, first.registry(), 4, 2);
        let stepwise = evolve(&evolve(&psi, &first).unwrap(), &second).unwrap();
        let at_once = evolve(&psi, &joined).unwrap();
        prop_assert!(stepwise.distance(&at_once).unwrap() <= 1e-10);
    }

    #[test]
    fn elements_are_unitary_and_label_blind(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, 3, 3, 4);
        for e in circuit.elements() {
            let u = element_unitary(e, circuit.registry()).unwrap();
            prop_assert!(u.unitarity_error() <= 1e-12);
            prop_assert!(u.is_internal_block_diagonal());
        }
        prop_assert!(compose_circuit(&circuit).unwrap().is_internal_block_diagonal());
    }

    #[test]
    fn number_resolved_outcomes_are_exhaustive(seed in any::<u64>(), photons in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circuit = random_circuit(&mut rng, 3, 2, 6);
        let psi = random_state(&mut rng, circuit.registry(), photons, 3);
        let out = evolve(&psi, &circuit).unwrap();
        let mut total = 0.0;
        for n0 in 0..=photons as u32 {
            for n1 in 0..=(photons as u32 - n0) {
                let n2 = photons as u32 - n0 - n1;
                let spec = HeraldSpec::new(
                    [("p0", n0), ("p1", n1), ("p2", n2)]
                        .iter()
                        .map(|&(p, n)| DetectorBinding { path: p.into(), model: DetectorModel::NumberResolving(n) })
                        .collect(),
                    vec![],
                )
                .unwrap();
                let r = herald(&out, &spec).unwrap();
                let w: f64 = r.branches.iter().map(|b| b.weight).sum();
                prop_assert!((w - r.probability).abs() <= 1e-10);
                total += r.probability;
            }
        }
        prop_assert!((total - 1.0).abs() <= 1e-10);
    }
}
