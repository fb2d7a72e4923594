mod common;

use common::{all_occupations, random_circuit, random_occupation, random_state};
use entfilter::elements::compose_circuit;
use entfilter::engine::{amplitude_permanent, evolve};
use entfilter::fock::{inner_product, FockState};
use entfilter::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn basis_transitions_match_permanents() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let paths = rng.random_range(2..=6);
        let photons = rng.random_range(1..=4);
        let elements = rng.random_range(1..12);
        let circuit = random_circuit(&mut rng, paths, 1, elements);
        let reg = circuit.registry().clone();
        let u = compose_circuit(&circuit).unwrap();
        let input = random_occupation(&mut rng, reg.len(), photons);
        let psi = FockState::from_terms(&reg, [(input.clone(), C64::new(1.0, 0.0))]).unwrap();
        let out = evolve(&psi, &circuit).unwrap();
        let mut total = 0.0;
        for occ in all_occupations(reg.len(), photons) {
            let oracle = amplitude_permanent(&input, &occ, &u).unwrap();
            total += oracle.norm_sqr();
            assert!((out.amplitude(&occ) - oracle).norm() <= 1e-9, "{occ:?}");
        }
        assert!((total - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn superposed_three_photon_states_match_permanents() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let circuit = random_circuit(&mut rng, 4, 2, 8);
        let reg = circuit.registry().clone();
        let u = compose_circuit(&circuit).unwrap();
        let psi = random_state(&mut rng, &reg, 3, 3);
        let out = evolve(&psi, &circuit).unwrap();
        for (occ, amp) in out.terms() {
            let oracle: C64 = psi
                .terms()
                .map(|(inp, c)| c * amplitude_permanent(inp, occ, &u).unwrap())
                .sum();
            assert!((amp - oracle).norm() <= 1e-9);
        }
        assert!((inner_product(&out, &out).unwrap().re - 1.0).abs() <= 1e-10);
    }
}
