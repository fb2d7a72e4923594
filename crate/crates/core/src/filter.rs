//! The heralded two-photon entanglement filter.
//!
//! Both builds share one wiring. The H components of the signals meet at a
//! first splitter (BS1), each then meets an H ancilla (BS2, BS3) whose spare
//! ports feed the detectors D1 and D2, and the signals recombine at BS4. The V
//! components bypass the interferometer and are attenuated by a V-only tap so
//! that both diagonal elements of the heralded map have magnitude 1/4. Fixed
//! phase shifts on `o1` remove the convention-dependent phases.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::elements::{
    compose_circuit, Angle, Circuit, DetectorBinding, DetectorModel, ElementKind, ElementSpec,
    HeraldSpec, HeraldedCircuit,
};
use crate::engine::{evolve, herald, output_density_matrix, HeraldResult, TwoQubitDensityMatrix};
use crate::fock::{
    apply_mode_unitary, FockState, InternalState, ModeRegistry, OccupationVector, PhotonInput,
    Polarization, DEFAULT_INTERNAL_DIM,
};
use crate::{Error, Result, C64};

pub const SIGNAL_INPUTS: [&str; 2] = ["s1", "s2"];
pub const ANCILLA_INPUTS: [&str; 2] = ["a1", "a2"];
pub const DETECTORS: [&str; 2] = ["d1", "d2"];
pub const OUTPUTS: [&str; 2] = ["o1", "o2"];

/// Two-qubit polarization basis order used throughout: `HH, HV, VH, VV`.
pub const Z_LABELS: [&str; 4] = ["HH", "HV", "VH", "VV"];

/// Phase corrections on `o1` (degrees) that calibrate the built circuits.
const CALIBRATION_PHI_H: f64 = 0.0;
const CALIBRATION_PHI_V: f64 = 180.0;

const LINEARITY_TOL: f64 = 1e-9;
const CALIBRATION_SKIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FilterVariant {
    /// Polarizing splitters separate V around four polarization-neutral splitters.
    Original,
    /// Four partially polarizing splitters.
    #[default]
    Ppbs,
}

impl fmt::Display for FilterVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterVariant::Original => "original",
            FilterVariant::Ppbs => "ppbs",
        })
    }
}

impl FromStr for FilterVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(FilterVariant::Original),
            "ppbs" => Ok(FilterVariant::Ppbs),
            _ => Err(Error::Config(format!(
                "unknown filter variant '{s}' (expected original or ppbs)"
            ))),
        }
    }
}

/// V-only attenuator: H passes untouched, V keeps amplitude `1/sqrt2`.
const V_TAP: ElementKind = ElementKind::BeamSplitter { r_h: 0.0, r_v: 0.5 };

fn paths(variant: FilterVariant) -> Vec<&'static str> {
    let mut p = vec!["a1", "a2", "d1", "d2", "o1", "o2", "s1", "s2", "x1", "x2"];
    if variant == FilterVariant::Original {
        p.extend(["v1", "v2"]);
    }
    p
}

pub fn filter_registry(variant: FilterVariant) -> Arc<ModeRegistry> {
    ModeRegistry::new(paths(variant), DEFAULT_INTERNAL_DIM).expect("static path list is valid")
}

/// Four-fold coincidence: threshold detectors at D1 and D2, one photon or
/// more at each output.
pub fn standard_herald() -> HeraldSpec {
    HeraldSpec::new(
        DETECTORS
            .iter()
            .map(|d| DetectorBinding {
                path: d.to_string(),
                model: DetectorModel::Threshold,
            })
            .collect(),
        OUTPUTS.iter().map(|o| o.to_string()).collect(),
    )
    .expect("static herald is valid")
}

fn uncalibrated_elements(variant: FilterVariant) -> Vec<ElementSpec> {
    use ElementKind as K;
    let two = ElementSpec::two;
    let mut e = Vec::new();
    match variant {
        FilterVariant::Ppbs => {
            e.push(two(V_TAP, "s1", "x1"));
            e.push(two(V_TAP, "s2", "x2"));
            e.push(two(K::PPBS_A, "s1", "s2"));
            e.push(two(K::PPBS_B, "s1", "a1"));
            e.push(two(K::PPBS_B, "s2", "a2"));
            e.push(two(K::PPBS_A, "s1", "s2"));
        }
        FilterVariant::Original => {
            e.push(two(K::Pbs, "s1", "v1"));
            e.push(two(K::Pbs, "s2", "v2"));
            e.push(two(V_TAP, "v1", "x1"));
            e.push(two(V_TAP, "v2", "x2"));
            e.push(two(K::BS_50_50, "s1", "s2"));
            e.push(two(K::BS_50_50, "s1", "a1"));
            e.push(two(K::BS_50_50, "s2", "a2"));
            e.push(two(K::BS_50_50, "s1", "s2"));
            e.push(two(K::Pbs, "s1", "v1"));
            e.push(two(K::Pbs, "s2", "v2"));
        }
    }
    e.push(two(K::PathSwap, "s1", "o1"));
    e.push(two(K::PathSwap, "s2", "o2"));
    e.push(two(K::PathSwap, "a1", "d1"));
    e.push(two(K::PathSwap, "a2", "d2"));
    e
}

fn inputs() -> Vec<String> {
    SIGNAL_INPUTS
        .iter()
        .chain(&ANCILLA_INPUTS)
        .map(|s| s.to_string())
        .collect()
}

/// The filter before the calibration phases are appended.
pub fn build_uncalibrated_filter(variant: FilterVariant) -> HeraldedCircuit {
    let circuit = Circuit::new(
        filter_registry(variant),
        uncalibrated_elements(variant),
        inputs(),
    )
    .expect("static wiring is valid");
    HeraldedCircuit {
        circuit,
        herald: standard_herald(),
    }
}

/// The calibrated filter with its four-fold herald.
pub fn build_filter_circuit(variant: FilterVariant) -> HeraldedCircuit {
    let mut elements = uncalibrated_elements(variant);
    elements.push(ElementSpec::one(
        ElementKind::PhaseShift {
            phi_h: Angle::from_degrees(CALIBRATION_PHI_H),
            phi_v: Angle::from_degrees(CALIBRATION_PHI_V),
        },
        OUTPUTS[0],
    ));
    let circuit =
        Circuit::new(filter_registry(variant), elements, inputs()).expect("static wiring is valid");
    HeraldedCircuit {
        circuit,
        herald: standard_herald(),
    }
}

/// Conditional amplitude operator on the signal polarizations.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedMap {
    /// Rows: output `HH, HV, VH, VV`; columns: input in the same order.
    pub matrix: Matrix4<C64>,
    /// Herald probability for each basis input.
    pub success: [f64; 4],
}

impl HeraldedMap {
    /// `(|HH><HH| - |VV><VV|) / 4`.
    pub fn ideal() -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = C64::new(0.25, 0.0);
        m[(3, 3)] = C64::new(-0.25, 0.0);
        HeraldedMap {
            matrix: m,
            success: [1.0 / 16.0, 0.0, 0.0, 1.0 / 16.0],
        }
    }

    pub fn apply(&self, input: &Vector4<C64>) -> Vector4<C64> {
        self.matrix * input
    }

    pub fn success_probability(&self, input: &Vector4<C64>) -> f64 {
        self.apply(input).norm_squared()
    }

    /// Largest elementwise distance to another map.
    pub fn max_deviation(&self, other: &HeraldedMap) -> f64 {
        (self.matrix - other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Basis index `2 p1 + p2` to polarizations.
fn basis_pols(k: usize) -> (Polarization, Polarization) {
    (
        Polarization::from_index(k / 2),
        Polarization::from_index(k % 2),
    )
}

/// Internal states of the ideal experiment: all photons identical.
pub fn ideal_ensemble() -> [InternalState; 4] {
    std::array::from_fn(|_| InternalState::basis(0))
}

/// Signal state `sum_k c_k |k>` (basis `HH, HV, VH, VV` on `s1, s2`) with H
/// ancillas at `a1, a2`. `internal` lists the states of the photons at
/// `s1, s2, a1, a2`.
pub fn signal_input(
    registry: &Arc<ModeRegistry>,
    amplitudes: &Vector4<C64>,
    internal: &[InternalState; 4],
) -> Result<FockState> {
    let norm = amplitudes.norm();
    if (norm - 1.0).abs() > crate::VALIDATION_TOL {
        return Err(Error::Validation(format!(
            "signal amplitudes have norm {norm}"
        )));
    }
    let mut parts = Vec::new();
    for (k, &c) in amplitudes.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let (p1, p2) = basis_pols(k);
        let photons = [
            PhotonInput::new(SIGNAL_INPUTS[0], p1, internal[0].clone()),
            PhotonInput::new(SIGNAL_INPUTS[1], p2, internal[1].clone()),
            PhotonInput::new(ANCILLA_INPUTS[0], Polarization::H, internal[2].clone()),
            PhotonInput::new(ANCILLA_INPUTS[1], Polarization::H, internal[3].clone()),
        ];
        parts.push((c, crate::fock::make_fock_input(&photons, registry)?));
    }
    let refs: Vec<(C64, &FockState)> = parts.iter().map(|(c, s)| (*c, s)).collect();
    FockState::linear_combination(&refs)
}

/// Evolves a signal state through the filter and applies the herald.
pub fn run_filter(
    circuit: &Circuit,
    spec: &HeraldSpec,
    amplitudes: &Vector4<C64>,
    internal: &[InternalState; 4],
) -> Result<HeraldResult> {
    let input = signal_input(circuit.registry(), amplitudes, internal)?;
    herald(&evolve(&input, circuit)?, spec)
}

/// Conditional output polarization state (trace = success probability).
pub fn filter_output_state(
    circuit: &Circuit,
    spec: &HeraldSpec,
    amplitudes: &Vector4<C64>,
    internal: &[InternalState; 4],
) -> Result<(TwoQubitDensityMatrix, f64)> {
    let r = run_filter(circuit, spec, amplitudes, internal)?;
    output_density_matrix(&r, (OUTPUTS[0], OUTPUTS[1]))
}

pub fn basis_vector(k: usize) -> Vector4<C64> {
    let mut v = Vector4::zeros();
    v[k] = C64::new(1.0, 0.0);
    v
}

/// Amplitudes of `(o1, o2)` polarizations with `d1, d2` holding the ancillas
/// in internal label 0.
fn output_amplitudes(state: &FockState) -> Result<Vector4<C64>> {
    let reg = state.registry();
    let mut out = Vector4::zeros();
    for k in 0..4 {
        let (q1, q2) = basis_pols(k);
        let modes = [
            reg.mode_index(OUTPUTS[0], q1, 0)?,
            reg.mode_index(OUTPUTS[1], q2, 0)?,
            reg.mode_index(DETECTORS[0], Polarization::H, 0)?,
            reg.mode_index(DETECTORS[1], Polarization::H, 0)?,
        ];
        out[k] = state.amplitude(&OccupationVector::from_modes(reg.len(), modes)?);
    }
    Ok(out)
}

/// Reconstructs the heralded map from the 4 basis inputs and checks
/// linearity on the 6 pairwise superpositions.
pub fn heralded_map(circuit: &Circuit, spec: &HeraldSpec) -> Result<HeraldedMap> {
    let ideal = ideal_ensemble();
    let reg = circuit.registry();
    let u = compose_circuit(circuit)?;
    let evolve_input = |v: &Vector4<C64>| -> Result<Vector4<C64>> {
        let out = apply_mode_unitary(&signal_input(reg, v, &ideal)?, &u)?;
        let r = herald(&out, spec)?;
        if r.branches.len() > 1 {
            return Err(Error::CoherenceLoss(format!(
                "ideal herald produced {} distinct detector outcomes",
                r.branches.len()
            )));
        }
        let amps = output_amplitudes(&out)?;
        let captured = amps.norm_squared();
        if (captured - r.probability).abs() > LINEARITY_TOL {
            return Err(Error::Contract(format!(
                "herald probability {} not carried by single-photon outputs ({captured})",
                r.probability
            )));
        }
        Ok(amps)
    };

    let mut matrix = Matrix4::zeros();
    let mut success = [0.0; 4];
    for (k, p) in success.iter_mut().enumerate() {
        let col = evolve_input(&basis_vector(k))?;
        *p = col.norm_squared();
        matrix.set_column(k, &col);
    }
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for (i, a) in Z_LABELS.iter().enumerate() {
        for (j, b) in Z_LABELS.iter().enumerate().skip(i + 1) {
            let v = (basis_vector(i) + basis_vector(j)) * s;
            let residual = (evolve_input(&v)? - matrix * v).norm();
            if residual > LINEARITY_TOL {
                return Err(Error::Contract(format!(
                    "heralded map is not linear: residual {residual:.3e} on {a}+{b}"
                )));
            }
        }
    }
    Ok(HeraldedMap { matrix, success })
}

fn wrap_degrees(x: f64) -> f64 {
    let y = (x + 180.0).rem_euclid(360.0) - 180.0;
    if y == -180.0 {
        180.0
    } else {
        y
    }
}

/// Appends a phase shift on `o1` making `<HH|M|HH>` real positive and
/// `<VV|M|VV>` real negative. Circuits that already satisfy this are
/// returned unchanged.
pub fn calibrate_phases(circuit: &Circuit) -> Result<Circuit> {
    let m = heralded_map(circuit, &standard_herald())?.matrix;
    let (hh, vv) = (m[(0, 0)], m[(3, 3)]);
    if hh.norm() < crate::VALIDATION_TOL || vv.norm() < crate::VALIDATION_TOL {
        return Err(Error::Degenerate(format!(
            "diagonal elements |HH| = {:.3e}, |VV| = {:.3e} too small to calibrate",
            hh.norm(),
            vv.norm()
        )));
    }
    let phi_h = wrap_degrees(-hh.arg().to_degrees());
    let phi_v = wrap_degrees(180.0 - vv.arg().to_degrees());
    if phi_h.abs().to_radians() < CALIBRATION_SKIP_TOL
        && phi_v.abs().to_radians() < CALIBRATION_SKIP_TOL
    {
        return Ok(circuit.clone());
    }
    circuit.with_appended([ElementSpec::one(
        ElementKind::PhaseShift {
            phi_h: Angle::from_degrees(phi_h),
            phi_v: Angle::from_degrees(phi_v),
        },
        OUTPUTS[0],
    )])
}

/// Herald probability for one H photon at `signal` plus the two ancillas,
/// with the signal photon emerging at any monitored output.
pub fn single_photon_blocking_check(
    circuit: &Circuit,
    spec: &HeraldSpec,
    signal: &str,
) -> Result<f64> {
    single_photon_leakage(
        circuit,
        spec,
        signal,
        &InternalState::basis(0),
        &ideal_ensemble()[2..4],
    )
}

/// As [`single_photon_blocking_check`] with explicit internal states for
/// the signal photon and the two ancillas.
pub fn single_photon_leakage(
    circuit: &Circuit,
    spec: &HeraldSpec,
    signal: &str,
    signal_state: &InternalState,
    ancilla_states: &[InternalState],
) -> Result<f64> {
    if !SIGNAL_INPUTS.contains(&signal) {
        return Err(Error::Config(format!("'{signal}' is not a signal input")));
    }
    if ancilla_states.len() != 2 {
        return Err(Error::Validation("need two ancilla internal states".into()));
    }
    let photons = [
        PhotonInput::new(signal, Polarization::H, signal_state.clone()),
        PhotonInput::new(
            ANCILLA_INPUTS[0],
            Polarization::H,
            ancilla_states[0].clone(),
        ),
        PhotonInput::new(
            ANCILLA_INPUTS[1],
            Polarization::H,
            ancilla_states[1].clone(),
        ),
    ];
    let input = crate::fock::make_fock_input(&photons, circuit.registry())?;
    let out = evolve(&input, circuit)?;
    // P(photon at o1 or o2) by inclusion-exclusion over the output set.
    let n = spec.outputs.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let subset: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| spec.outputs[i].clone())
            .collect();
        let sub = HeraldSpec::new(spec.detectors.clone(), subset)?;
        let p = herald(&out, &sub)?.probability;
        total += if mask.count_ones() % 2 == 1 { p } else { -p };
    }
    Ok(total.max(0.0))
}
