//! Partial distinguishability from HOM visibilities, noisy truth tables and
//! the double-pair ancilla background.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::analysis::{table_fidelity, truth_table_from_outputs, BasisId, TruthTable};
use crate::elements::{compose_circuit, DetectorModel, HeraldSpec, HeraldedCircuit};
use crate::engine::{herald, output_density_matrix, TwoQubitDensityMatrix};
use crate::filter::{build_filter_circuit, signal_input, FilterVariant, ANCILLA_INPUTS, OUTPUTS};
use crate::fock::{apply_mode_unitary, make_fock_input, InternalState, PhotonInput, Polarization};
use crate::{Error, Result, VALIDATION_TOL};

/// HOM visibilities for photons of the same pair and of different pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityParams {
    pub v_same: f64,
    pub v_cross: f64,
}

impl Default for VisibilityParams {
    fn default() -> Self {
        VisibilityParams {
            v_same: 0.96,
            v_cross: 0.85,
        }
    }
}

impl VisibilityParams {
    pub fn new(v_same: f64, v_cross: f64) -> Result<Self> {
        for (name, v) in [("v_same", v_same), ("v_cross", v_cross)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(VisibilityParams { v_same, v_cross })
    }

    pub fn ideal() -> Self {
        VisibilityParams {
            v_same: 1.0,
            v_cross: 1.0,
        }
    }

    /// Overlap matrix over `(s1, s2, a1, a2)`; the signals form one pair and
    /// the ancillas the other.
    pub fn gram_matrix(&self) -> Matrix4<f64> {
        let (a, b) = (self.v_same.sqrt(), self.v_cross.sqrt());
        Matrix4::new(
            1.0, a, b, b, //
            a, 1.0, b, b, //
            b, b, 1.0, a, //
            b, b, a, 1.0,
        )
    }
}

/// Internal states of the photons at `s1, s2, a1, a2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonEnsemble {
    pub states: [InternalState; 4],
}

impl PhotonEnsemble {
    pub fn ideal() -> Self {
        PhotonEnsemble {
            states: std::array::from_fn(|_| InternalState::basis(0)),
        }
    }

    /// `|<psi_i|psi_j>|`.
    pub fn overlaps(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.states[i].overlap(&self.states[j]).norm())
    }
}

/// Real internal states whose overlaps are the square roots of the
/// requested visibilities, from `G = Q diag(lambda) Q^T`.
pub fn internal_states_from_visibilities(params: &VisibilityParams) -> Result<PhotonEnsemble> {
    VisibilityParams::new(params.v_same, params.v_cross)?;
    let eig = SymmetricEigen::new(params.gram_matrix());
    let min = eig.eigenvalues.min();
    if min < -VALIDATION_TOL {
        return Err(Error::InfeasibleVisibilities {
            min_eigenvalue: min,
        });
    }
    let mut columns: Vec<Vector4<f64>> = Vec::new();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    for k in order {
        let lambda = eig.eigenvalues[k];
        if lambda <= VALIDATION_TOL {
            continue;
        }
        let mut col: Vector4<f64> = eig.eigenvectors.column(k) * lambda.sqrt();
        if col.sum() < 0.0 {
            col = -col;
        }
        columns.push(col);
    }
    let states = (0..4)
        .map(|i| {
            let row: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            InternalState::from_real(&row.iter().map(|x| x / norm).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhotonEnsemble {
        states: states.try_into().expect("four rows"),
    })
}

/// The three measured tables of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyTruthTables {
    pub zz: TruthTable,
    pub xy: TruthTable,
    pub xx: TruthTable,
}

impl NoisyTruthTables {
    pub fn tables(&self) -> [&TruthTable; 3] {
        [&self.zz, &self.xy, &self.xx]
    }

    /// Pooled fidelities `(F_zz, F_xy, F_xx)`.
    pub fn fidelities(&self) -> Result<[f64; 3]> {
        Ok([
            table_fidelity(&self.zz)?,
            table_fidelity(&self.xy)?,
            table_fidelity(&self.xx)?,
        ])
    }
}

/// Conditional output states of `filter` for the four states of `in_basis`.
pub fn conditional_outputs(
    filter: &HeraldedCircuit,
    ensemble: &PhotonEnsemble,
    in_basis: BasisId,
) -> Result<[TwoQubitDensityMatrix; 4]> {
    let u = compose_circuit(&filter.circuit)?;
    let reg = filter.circuit.registry();
    let mut out = Vec::with_capacity(4);
    for v in in_basis.states() {
        let evolved = apply_mode_unitary(&signal_input(reg, &v, &ensemble.states)?, &u)?;
        let r = herald(&evolved, &filter.herald)?;
        out.push(output_density_matrix(&r, (OUTPUTS[0], OUTPUTS[1]))?.0);
    }
    Ok(out.try_into().expect("four inputs"))
}

/// Z->Z, X->Y and X->X tables of the calibrated filter at the given
/// visibilities.
pub fn simulate_noisy_truth_tables(params: &VisibilityParams) -> Result<NoisyTruthTables> {
    simulate_noisy_truth_tables_with(&build_filter_circuit(FilterVariant::default()), params)
}

pub fn simulate_noisy_truth_tables_with(
    filter: &HeraldedCircuit,
    params: &VisibilityParams,
) -> Result<NoisyTruthTables> {
    let ensemble = internal_states_from_visibilities(params)?;
    let z = conditional_outputs(filter, &ensemble, BasisId::Z)?;
    let x = conditional_outputs(filter, &ensemble, BasisId::X)?;
    Ok(NoisyTruthTables {
        zz: truth_table_from_outputs(&z, BasisId::Z, BasisId::Z),
        xy: truth_table_from_outputs(&x, BasisId::X, BasisId::Y),
        xx: truth_table_from_outputs(&x, BasisId::X, BasisId::X),
    })
}

/// Herald probability and output polarization weights of the background
/// channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub probability: f64,
    /// Unnormalized weights on `HH, HV, VH, VV`; they sum to `probability`.
    pub weights: [f64; 4],
}

impl Background {
    /// Weights normalized to one, or `None` when nothing is heralded.
    pub fn distribution(&self) -> Option<[f64; 4]> {
        (self.probability > 0.0).then(|| self.weights.map(|w| w / self.probability))
    }
}

/// Two photon pairs in the ancilla inputs and vacuum at the signals. Pair A
/// takes the internal states of the signal pair and pair B those of the
/// ancilla pair, so each ancilla input carries one photon from each pair.
pub fn background_double_pair(
    params: &VisibilityParams,
    detector: DetectorModel,
) -> Result<Background> {
    background_double_pair_with(
        &build_filter_circuit(FilterVariant::default()),
        params,
        detector,
    )
}

pub fn background_double_pair_with(
    filter: &HeraldedCircuit,
    params: &VisibilityParams,
    detector: DetectorModel,
) -> Result<Background> {
    let e = internal_states_from_visibilities(params)?.states;
    let h = Polarization::H;
    let photons = [
        PhotonInput::new(ANCILLA_INPUTS[0], h, e[0].clone()),
        PhotonInput::new(ANCILLA_INPUTS[1], h, e[1].clone()),
        PhotonInput::new(ANCILLA_INPUTS[0], h, e[2].clone()),
        PhotonInput::new(ANCILLA_INPUTS[1], h, e[3].clone()),
    ];
    let input = make_fock_input(&photons, filter.circuit.registry())?;
    let evolved = apply_mode_unitary(&input, &compose_circuit(&filter.circuit)?)?;
    let spec: HeraldSpec = filter.herald.with_detector_model(detector);
    let r = herald(&evolved, &spec)?;
    let (rho, probability) = output_density_matrix(&r, (OUTPUTS[0], OUTPUTS[1]))?;
    let weights = std::array::from_fn(|k| rho.0[(k, k)].re);
    Ok(Background {
        probability,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_visibilities_give_identical_states() {
        let e = internal_states_from_visibilities(&VisibilityParams::ideal()).unwrap();
        for s in &e.states {
            assert_eq!(s.dim(), 1);
            assert_abs_diff_eq!(s.coefficients()[0].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn default_overlaps() {
        let p = VisibilityParams::default();
        let o = internal_states_from_visibilities(&p).unwrap().overlaps();
        assert_abs_diff_eq!(o[(0, 1)], 0.96f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(o[(2, 3)], 0.96f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(o[(0, 2)], 0.85f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(o[(1, 3)], 0.85f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(0.96f64.sqrt(), 0.97980, epsilon = 1e-5);
        assert_abs_diff_eq!(0.85f64.sqrt(), 0.92195, epsilon = 1e-5);
    }

    #[test]
    fn infeasible_gram_reports_eigenvalue() {
        match internal_states_from_visibilities(&VisibilityParams {
            v_same: 0.0,
            v_cross: 1.0,
        }) {
            Err(Error::InfeasibleVisibilities { min_eigenvalue }) => {
                assert_abs_diff_eq!(min_eigenvalue, -1.0, epsilon = 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(VisibilityParams::new(1.1, 0.5).is_err());
    }

    #[test]
    fn ideal_tables_match_closed_form() {
        let t = simulate_noisy_truth_tables(&VisibilityParams::ideal()).unwrap();
        assert_abs_diff_eq!(t.zz.values[0][0], 1.0 / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.zz.values[3][3], 1.0 / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.xx.values[0][1], 1.0 / 64.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.xx.values[0][0], 0.0, epsilon = 1e-12);
        for f in t.fidelities().unwrap() {
            assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn background_is_pure_hh() {
        let b =
            background_double_pair(&VisibilityParams::default(), DetectorModel::Threshold).unwrap();
        assert!(b.probability > 0.0);
        for w in &b.weights[1..] {
            assert!(w.abs() <= 1e-12);
        }
        assert_abs_diff_eq!(b.distribution().unwrap()[0], 1.0, epsilon = 1e-12);
    }
}
