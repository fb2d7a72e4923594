//! State evolution, the permanent oracle, heralded detection and conditional
//! two-qubit output states.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen, Vector4};

use crate::elements::{
    compose_circuit, Circuit, DetectorBinding, DetectorModel, ElementKind, ElementSpec, HeraldSpec,
    HeraldedCircuit, ModeUnitary,
};
use crate::fock::{
    apply_mode_unitary, make_fock_input, FockState, InternalState, ModeRegistry, OccupationVector,
    PhotonInput, Polarization,
};
use crate::{Error, Result, C64};

/// Evolves `state` through every element of `circuit`.
pub fn evolve(state: &FockState, circuit: &Circuit) -> Result<FockState> {
    state.check_registry(circuit.registry())?;
    let u = compose_circuit(circuit)?;
    apply_mode_unitary(state, &u)
}

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order.
pub fn permanent(a: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let added = gray & (1 << bit) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += a[(i, bit)];
            } else {
                *s -= a[(i, bit)];
            }
        }
        let prod: C64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// `<output| U |input>` as `per(U_sub) / sqrt(prod in! prod out!)`.
pub fn amplitude_permanent(
    input: &OccupationVector,
    output: &OccupationVector,
    u: &ModeUnitary,
) -> Result<C64> {
    if input.total() != output.total() {
        return Err(Error::Validation(format!(
            "photon number mismatch: {} in, {} out",
            input.total(),
            output.total()
        )));
    }
    if input.len() != u.dim() || output.len() != u.dim() {
        return Err(Error::RegistryMismatch(
            "occupation length differs from unitary dimension".into(),
        ));
    }
    let cols = input.photons();
    let rows = output.photons();
    let n = cols.len();
    let sub = DMatrix::from_fn(n, n, |r, c| u.entry(rows[r] as usize, cols[c] as usize));
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent(&sub) / norm)
}

/// One coherent component of a heralded state.
#[derive(Debug, Clone)]
pub struct HeraldBranch {
    /// Detector-mode occupation that produced this branch.
    pub detector_occupation: OccupationVector,
    /// Normalized conditional state on the non-detector modes.
    pub state: FockState,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct HeraldResult {
    pub probability: f64,
    pub branches: Vec<HeraldBranch>,
}

/// Conditions `state` on the herald pattern.
///
/// Amplitudes sharing a detector-mode occupation (including polarization and
/// internal labels) stay coherent; distinct occupations are summed
/// incoherently.
pub fn herald(state: &FockState, spec: &HeraldSpec) -> Result<HeraldResult> {
    let reg = state.registry();
    spec.validate(reg)?;
    let num_paths = reg.num_paths();
    let mut detector_of_path: Vec<Option<DetectorModel>> = vec![None; num_paths];
    for d in &spec.detectors {
        detector_of_path[reg.require_path(&d.path)?] = Some(d.model);
    }
    let output_paths: Vec<usize> = spec
        .outputs
        .iter()
        .map(|o| reg.require_path(o))
        .collect::<Result<_>>()?;
    let path_of = |mode: usize| reg.decompose(mode).0;

    let mut groups: BTreeMap<OccupationVector, Vec<(OccupationVector, C64)>> = BTreeMap::new();
    let mut per_path = vec![0u32; num_paths];
    for (occ, amp) in state.terms() {
        per_path.iter_mut().for_each(|c| *c = 0);
        for &m in occ.photons() {
            per_path[path_of(m as usize)] += 1;
        }
        let detectors_ok = detector_of_path
            .iter()
            .zip(&per_path)
            .all(|(model, &n)| model.is_none_or(|m| m.accepts(n)));
        let outputs_ok = output_paths.iter().all(|&p| per_path[p] >= 1);
        if !(detectors_ok && outputs_ok) {
            continue;
        }
        let is_det = |m: usize| detector_of_path[path_of(m)].is_some();
        let key = occ.filtered(is_det);
        let rest = occ.filtered(|m| !is_det(m));
        groups.entry(key).or_default().push((rest, *amp));
    }

    let mut branches = Vec::new();
    let mut probability = 0.0;
    for (key, terms) in groups {
        let sub = FockState::from_terms(reg, terms)?;
        let weight = sub.norm_sqr();
        if weight == 0.0 {
            continue;
        }
        probability += weight;
        branches.push(HeraldBranch {
            detector_occupation: key,
            state: sub.normalized()?,
            weight,
        });
    }
    Ok(HeraldResult {
        probability,
        branches,
    })
}

/// Prepares `photons`, runs them through a heralded circuit and applies
/// its herald.
pub fn simulate_heralded(doc: &HeraldedCircuit, photons: &[PhotonInput]) -> Result<HeraldResult> {
    let input = make_fock_input(photons, doc.circuit.registry())?;
    herald(&evolve(&input, &doc.circuit)?, &doc.herald)
}

/// Two-qubit polarization density matrix in the basis `HH, HV, VH, VV`
/// (first letter: first output path).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensityMatrix(pub Matrix4<C64>);

impl TwoQubitDensityMatrix {
    pub fn from_pure(v: &Vector4<C64>) -> Self {
        TwoQubitDensityMatrix(v * v.adjoint())
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// `<v| rho |v>`.
    pub fn expectation(&self, v: &Vector4<C64>) -> f64 {
        (v.adjoint() * self.0 * v)[(0, 0)].re
    }

    /// Trace-one copy.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::Validation("density matrix has zero trace".into()));
        }
        Ok(TwoQubitDensityMatrix(self.0 / C64::new(t, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Self {
        TwoQubitDensityMatrix(self.0 + other.0)
    }

    pub fn scaled(&self, x: f64) -> Self {
        TwoQubitDensityMatrix(self.0 * C64::new(x, 0.0))
    }
}

/// Polarization state of two output paths, tracing out internal labels and
/// every other unmeasured mode. Returns the sub-normalized matrix (trace =
/// herald probability) and its trace.
pub fn output_density_matrix(
    result: &HeraldResult,
    outputs: (&str, &str),
) -> Result<(TwoQubitDensityMatrix, f64)> {
    let mut rho = Matrix4::<C64>::zeros();
    for branch in &result.branches {
        let reg = branch.state.registry();
        let o1 = reg.require_path(outputs.0)?;
        let o2 = reg.require_path(outputs.1)?;
        let scale = branch.weight.sqrt();
        let mut envs: BTreeMap<(usize, usize, OccupationVector), Vector4<C64>> = BTreeMap::new();
        for (occ, amp) in branch.state.terms() {
            let mut first = Vec::new();
            let mut second = Vec::new();
            for &m in occ.photons() {
                let (p, pol, internal) = reg.decompose(m as usize);
                if p == o1 {
                    first.push((pol, internal));
                } else if p == o2 {
                    second.push((pol, internal));
                }
            }
            if first.len() != 1 || second.len() != 1 {
                return Err(Error::Contract(format!(
                    "heralded branch has {} photon(s) in '{}' and {} in '{}'; expected exactly one each",
                    first.len(),
                    outputs.0,
                    second.len(),
                    outputs.1
                )));
            }
            let ((p1, i1), (p2, i2)) = (first[0], second[0]);
            let env = occ.filtered(|m| {
                let p = reg.decompose(m).0;
                p != o1 && p != o2
            });
            let v = envs.entry((i1, i2, env)).or_insert_with(Vector4::zeros);
            v[p1.index() * 2 + p2.index()] += amp * scale;
        }
        for v in envs.values() {
            rho += v * v.adjoint();
        }
    }
    let rho = TwoQubitDensityMatrix(rho);
    let p = rho.trace();
    Ok((rho, p))
}

/// Coincidence probability behind a balanced splitter for one photon per
/// input with internal overlap `overlap`, computed by simulation.
pub fn hom_coincidence(overlap: f64) -> Result<f64> {
    let reg: Arc<ModeRegistry> = ModeRegistry::new(["x", "y"], 2)?;
    let photons = [
        PhotonInput::new("x", Polarization::H, InternalState::basis(0)),
        PhotonInput::new("y", Polarization::H, InternalState::with_overlap(overlap)?),
    ];
    let input = make_fock_input(&photons, &reg)?;
    let circuit = Circuit::new(
        reg.clone(),
        vec![ElementSpec::two(ElementKind::BS_50_50, "x", "y")],
        vec!["x".into(), "y".into()],
    )?;
    let spec = HeraldSpec::new(
        vec![
            DetectorBinding {
                path: "x".into(),
                model: DetectorModel::Threshold,
            },
            DetectorBinding {
                path: "y".into(),
                model: DetectorModel::Threshold,
            },
        ],
        vec![],
    )?;
    Ok(herald(&evolve(&input, &circuit)?, &spec)?.probability)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn brute_permanent(a: &DMatrix<C64>) -> C64 {
        fn rec(a: &DMatrix<C64>, row: usize, used: &mut Vec<bool>) -> C64 {
            if row == a.nrows() {
                return C64::new(1.0, 0.0);
            }
            let mut s = C64::new(0.0, 0.0);
            for c in 0..a.ncols() {
                if !used[c] {
                    used[c] = true;
                    s += a[(row, c)] * rec(a, row + 1, used);
                    used[c] = false;
                }
            }
            s
        }
        rec(a, 0, &mut vec![false; a.ncols()])
    }

    #[test]
    fn ryser_matches_full_expansion() {
        for n in 0..=6 {
            let a = DMatrix::from_fn(n, n, |r, c| {
                C64::new(
                    ((r * 7 + c * 3) % 5) as f64 - 2.0,
                    ((r + 2 * c) % 3) as f64 * 0.5,
                )
            });
            assert_abs_diff_eq!(
                (permanent(&a) - brute_permanent(&a)).norm(),
                0.0,
                epsilon = 1e-9
            );
        }
        let ones = DMatrix::from_element(4, 4, C64::new(1.0, 0.0));
        assert_abs_diff_eq!(permanent(&ones).re, 24.0, epsilon = 1e-12);
    }

    fn splitter() -> (Arc<ModeRegistry>, ModeUnitary) {
        let reg = ModeRegistry::new(["x", "y"], 1).unwrap();
        let c = Circuit::new(
            reg.clone(),
            vec![ElementSpec::two(ElementKind::BS_50_50, "x", "y")],
            vec![],
        )
        .unwrap();
        let u = compose_circuit(&c).unwrap();
        (reg, u)
    }

    fn occ(reg: &ModeRegistry, counts: &[(&str, u32)]) -> OccupationVector {
        let mut v = vec![0; reg.len()];
        for &(p, n) in counts {
            v[reg.mode_index(p, Polarization::H, 0).unwrap()] = n;
        }
        OccupationVector::from_counts(&v)
    }

    #[test]
    fn permanent_amplitudes_by_hand() {
        let (reg, u) = splitter();
        let x = occ(&reg, &[("x", 1)]);
        let y = occ(&reg, &[("y", 1)]);
        let a = amplitude_permanent(&x, &y, &u).unwrap();
        assert_abs_diff_eq!(
            (a - C64::new(0.0, FRAC_1_SQRT_2)).norm(),
            0.0,
            epsilon = 1e-15
        );

        let one_one = occ(&reg, &[("x", 1), ("y", 1)]);
        let hom = amplitude_permanent(&one_one, &one_one, &u).unwrap();
        assert_abs_diff_eq!(hom.norm(), 0.0, epsilon = 1e-15);

        let two_zero = occ(&reg, &[("x", 2)]);
        let split = amplitude_permanent(&two_zero, &one_one, &u).unwrap();
        assert_abs_diff_eq!(split.norm_sqr(), 0.5, epsilon = 1e-15);

        assert!(matches!(
            amplitude_permanent(&x, &one_one, &u),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn single_photon_splits_evenly() {
        let (reg, u) = splitter();
        let psi = make_fock_input(&[PhotonInput::ideal("x", Polarization::H)], &reg).unwrap();
        let out = apply_mode_unitary(&psi, &u).unwrap();
        let ax = out.amplitude(&occ(&reg, &[("x", 1)]));
        let ay = out.amplitude(&occ(&reg, &[("y", 1)]));
        assert_abs_diff_eq!(
            (ax - C64::new(FRAC_1_SQRT_2, 0.0)).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (ay - C64::new(0.0, FRAC_1_SQRT_2)).norm(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn hom_dip_in_state_evolution() {
        let (reg, u) = splitter();
        let h = Polarization::H;
        let psi = make_fock_input(
            &[PhotonInput::ideal("x", h), PhotonInput::ideal("y", h)],
            &reg,
        )
        .unwrap();
        let out = apply_mode_unitary(&psi, &u).unwrap();
        assert_abs_diff_eq!(
            out.amplitude(&occ(&reg, &[("x", 1), ("y", 1)])).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_never_heralds() {
        let reg = ModeRegistry::new(["x"], 1).unwrap();
        let spec = HeraldSpec::new(
            vec![DetectorBinding {
                path: "x".into(),
                model: DetectorModel::Threshold,
            }],
            vec![],
        )
        .unwrap();
        let r = herald(&FockState::vacuum(&reg), &spec).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(r.branches.is_empty());
    }

    #[test]
    fn hom_closed_form() {
        for &x2 in &[0.0f64, 0.0625, 0.25, 0.85, 0.96, 1.0] {
            let x = x2.sqrt();
            assert_abs_diff_eq!(
                hom_coincidence(x).unwrap(),
                (1.0 - x2) / 2.0,
                epsilon = 1e-10
            );
        }
        assert_abs_diff_eq!(
            hom_coincidence(0.85f64.sqrt()).unwrap(),
            0.075,
            epsilon = 1e-10
        );
    }

    #[test]
    fn output_density_rejects_wrong_photon_number() {
        let reg = ModeRegistry::new(["o1", "o2"], 1).unwrap();
        let psi = make_fock_input(&[PhotonInput::ideal("o1", Polarization::H)], &reg).unwrap();
        let r = herald(&psi, &HeraldSpec::new(vec![], vec![]).unwrap()).unwrap();
        assert!(matches!(
            output_density_matrix(&r, ("o1", "o2")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn output_density_traces_internal_labels() {
        // H at o1 with internal e0, (H e0 + V e1)/sqrt2 at o2: internal label
        // of o2 is entangled with its polarization, so coherence is lost.
        let reg = ModeRegistry::new(["o1", "o2"], 2).unwrap();
        let h = Polarization::H;
        let s = FRAC_1_SQRT_2;
        let a = make_fock_input(
            &[PhotonInput::ideal("o1", h), PhotonInput::ideal("o2", h)],
            &reg,
        )
        .unwrap();
        let b = make_fock_input(
            &[
                PhotonInput::ideal("o1", h),
                PhotonInput::new("o2", Polarization::V, InternalState::basis(1)),
            ],
            &reg,
        )
        .unwrap();
        let psi = FockState::linear_combination(&[(C64::new(s, 0.0), &a), (C64::new(s, 0.0), &b)])
            .unwrap();
        let r = herald(
            &psi,
            &HeraldSpec::new(vec![], vec!["o1".into(), "o2".into()]).unwrap(),
        )
        .unwrap();
        let (rho, p) = output_density_matrix(&r, ("o1", "o2")).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.0[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.0[(1, 1)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.0[(0, 1)].norm(), 0.0, epsilon = 1e-12);
    }
}
