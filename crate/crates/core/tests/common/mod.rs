#![allow(dead_code)]

use std::sync::Arc;

use entfilter::elements::{Angle, Circuit, ElementKind, ElementSpec};
use entfilter::fock::{FockState, ModeRegistry, OccupationVector};
use entfilter::C64;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

pub const PATH_NAMES: [&str; 8] = ["p0", "p1", "p2", "p3", "p4", "p5", "p6", "p7"];

pub fn random_kind(rng: &mut impl RngCore) -> ElementKind {
    let angle = |rng: &mut dyn RngCore| Angle::from_degrees(rng.random_range(-180.0..180.0));
    match rng.random_range(0..6) {
        0 => ElementKind::BeamSplitter {
            r_h: rng.random(),
            r_v: rng.random(),
        },
        1 => ElementKind::Pbs,
        2 => ElementKind::Hwp { theta: angle(rng) },
        3 => ElementKind::Qwp { theta: angle(rng) },
        4 => ElementKind::PhaseShift {
            phi_h: angle(rng),
            phi_v: angle(rng),
        },
        _ => ElementKind::PathSwap,
    }
}

/// Random circuit over `num_paths` paths with `num_elements` elements.
pub fn random_circuit(
    rng: &mut impl RngCore,
    num_paths: usize,
    internal_dim: usize,
    num_elements: usize,
) -> Circuit {
    let reg = ModeRegistry::new(PATH_NAMES[..num_paths].iter().copied(), internal_dim).unwrap();
    let mut elements = Vec::new();
    while elements.len() < num_elements {
        let kind = random_kind(rng);
        if kind.num_ports() == 2 {
            if num_paths < 2 {
                continue;
            }
            let mut pair: Vec<&str> = PATH_NAMES[..num_paths].to_vec();
            pair.shuffle(rng);
            elements.push(ElementSpec::two(kind, pair[0], pair[1]));
        } else {
            let p = PATH_NAMES[rng.random_range(0..num_paths)];
            elements.push(ElementSpec::one(kind, p));
        }
    }
    Circuit::new(reg, elements, vec![]).unwrap()
}

/// Every occupation of `photons` photons over `modes` modes.
pub fn all_occupations(modes: usize, photons: usize) -> Vec<OccupationVector> {
    fn rec(
        start: usize,
        left: usize,
        modes: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<OccupationVector>,
    ) {
        if left == 0 {
            out.push(OccupationVector::from_modes(modes, cur.iter().copied()).unwrap());
            return;
        }
        for m in start..modes {
            cur.push(m);
            rec(m, left - 1, modes, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, photons, modes, &mut Vec::new(), &mut out);
    out
}

pub fn random_occupation(rng: &mut impl RngCore, modes: usize, photons: usize) -> OccupationVector {
    OccupationVector::from_modes(modes, (0..photons).map(|_| rng.random_range(0..modes))).unwrap()
}

/// Normalized superposition of a few random occupations.
pub fn random_state(
    rng: &mut impl RngCore,
    reg: &Arc<ModeRegistry>,
    photons: usize,
    terms: usize,
) -> FockState {
    let t: Vec<(OccupationVector, C64)> = (0..terms)
        .map(|_| {
            let occ = random_occupation(rng, reg.len(), photons);
            (
                occ,
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    FockState::from_terms(reg, t).unwrap().normalized().unwrap()
}
