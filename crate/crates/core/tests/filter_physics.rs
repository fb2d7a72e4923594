use approx::assert_abs_diff_eq;
use entfilter::analysis::{concurrence, BasisId};
use entfilter::filter::{
    build_filter_circuit, filter_output_state, heralded_map, ideal_ensemble, run_filter,
    FilterVariant, HeraldedMap,
};
use entfilter::fock::InternalState;
use entfilter::format::{parse_circuit, serialize_circuit};
use entfilter::C64;
use nalgebra::Vector4;

fn ppbs() -> entfilter::elements::HeraldedCircuit {
    build_filter_circuit(FilterVariant::Ppbs)
}

#[test]
fn basis_success_probabilities() {
    let hc = ppbs();
    let m = heralded_map(&hc.circuit, &hc.herald).unwrap();
    let expected = [1.0 / 16.0, 0.0, 0.0, 1.0 / 16.0];
    for (p, e) in m.success.iter().zip(expected) {
        assert_abs_diff_eq!(*p, e, epsilon = 1e-12);
    }
}

#[test]
fn herald_probabilities_from_full_evolution() {
    let hc = ppbs();
    let ideal = ideal_ensemble();
    let vv = run_filter(&hc.circuit, &hc.herald, &BasisId::Z.state(3), &ideal).unwrap();
    assert_abs_diff_eq!(vv.probability, 1.0 / 16.0, epsilon = 1e-12);
    let hv = run_filter(&hc.circuit, &hc.herald, &BasisId::Z.state(1), &ideal).unwrap();
    assert!(hv.probability <= 1e-12);
    let w: f64 = vv.branches.iter().map(|b| b.weight).sum();
    assert_abs_diff_eq!(w, vv.probability, epsilon = 1e-10);
}

#[test]
fn variants_agree() {
    let a = build_filter_circuit(FilterVariant::Original);
    let b = ppbs();
    let ma = heralded_map(&a.circuit, &a.herald).unwrap();
    let mb = heralded_map(&b.circuit, &b.herald).unwrap();
    assert!(ma.max_deviation(&mb) <= 1e-10);
}

#[test]
fn diagonal_inputs_become_bell_states() {
    let hc = ppbs();
    let ideal = ideal_ensemble();
    let s = std::f64::consts::FRAC_1_SQRT_2;

    let (rho, p) =
        filter_output_state(&hc.circuit, &hc.herald, &BasisId::X.state(0), &ideal).unwrap();
    assert_abs_diff_eq!(p, 1.0 / 32.0, epsilon = 1e-12);
    let minus = Vector4::new(
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(-s, 0.0),
    );
    assert_abs_diff_eq!(
        rho.normalized().unwrap().expectation(&minus),
        1.0,
        epsilon = 1e-10
    );
    assert_abs_diff_eq!(rho.0[(0, 3)].norm(), p / 2.0, epsilon = 1e-10);
    assert_abs_diff_eq!(concurrence(&rho).unwrap(), 1.0, epsilon = 1e-9);
    // HH - VV = RR + LL up to normalization.
    let rr_ll = (BasisId::Y.state(0) + BasisId::Y.state(3)) * C64::new(s, 0.0);
    assert_abs_diff_eq!(
        rho.normalized().unwrap().expectation(&rr_ll),
        1.0,
        epsilon = 1e-10
    );

    let (rho, p) =
        filter_output_state(&hc.circuit, &hc.herald, &BasisId::X.state(1), &ideal).unwrap();
    assert_abs_diff_eq!(p, 1.0 / 32.0, epsilon = 1e-12);
    let plus = Vector4::new(
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
    );
    assert_abs_diff_eq!(
        rho.normalized().unwrap().expectation(&plus),
        1.0,
        epsilon = 1e-10
    );
}

#[test]
fn hh_input_gives_scaled_projector() {
    let hc = ppbs();
    let (rho, p) = filter_output_state(
        &hc.circuit,
        &hc.herald,
        &BasisId::Z.state(0),
        &ideal_ensemble(),
    )
    .unwrap();
    assert_abs_diff_eq!(p, 1.0 / 16.0, epsilon = 1e-12);
    for r in 0..4 {
        for c in 0..4 {
            let target = if (r, c) == (0, 0) { 1.0 / 16.0 } else { 0.0 };
            assert_abs_diff_eq!(
                (rho.0[(r, c)] - C64::new(target, 0.0)).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }
}

#[test]
fn distinguishable_photons_lose_coherence() {
    let hc = ppbs();
    let ens: [InternalState; 4] = std::array::from_fn(InternalState::basis);
    let (rho, p) =
        filter_output_state(&hc.circuit, &hc.herald, &BasisId::X.state(0), &ens).unwrap();
    assert!(p > 0.0);
    assert!(rho.0[(0, 3)].norm() <= 1e-12);
    assert!(rho.hermiticity_error() <= 1e-10);
    assert!(rho.min_eigenvalue() >= -1e-9);
    assert!(concurrence(&rho).unwrap() <= 1e-9);
}

#[test]
fn predicted_map_matches_outputs() {
    let hc = ppbs();
    let m = heralded_map(&hc.circuit, &hc.herald).unwrap();
    assert!(m.max_deviation(&HeraldedMap::ideal()) <= 1e-10);
    for b in [BasisId::X, BasisId::Y] {
        for k in 0..4 {
            let v = b.state(k);
            let (_, p) =
                filter_output_state(&hc.circuit, &hc.herald, &v, &ideal_ensemble()).unwrap();
            assert_abs_diff_eq!(p, m.success_probability(&v), epsilon = 1e-10);
        }
    }
}

#[test]
fn exported_filter_round_trips() {
    for v in [FilterVariant::Original, FilterVariant::Ppbs] {
        let hc = build_filter_circuit(v);
        let text = serialize_circuit(&hc);
        assert_eq!(parse_circuit(&text).unwrap(), hc);
    }
}
