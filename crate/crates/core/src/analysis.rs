//! Measurement bases, truth tables, fidelity estimators and the
//! process-fidelity decomposition over the four diagonal error operators.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::engine::TwoQubitDensityMatrix;
use crate::filter::HeraldedMap;
use crate::{Error, Result, C64};

/// Tolerance below which a negative fidelity or error weight is still
/// treated as consistent with the model.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Default threshold for the polarization-preservation check.
pub const DEFAULT_ASSUMPTION_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisId {
    Z,
    X,
    Y,
}

impl BasisId {
    pub const ALL: [BasisId; 3] = [BasisId::Z, BasisId::X, BasisId::Y];

    /// Single-photon states `(first, second)` as `(H, V)` amplitudes.
    fn single(self) -> [[C64; 2]; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            BasisId::Z => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            BasisId::X => [[r(s), r(s)], [r(s), r(-s)]],
            BasisId::Y => [[r(s), C64::new(0.0, s)], [r(s), C64::new(0.0, -s)]],
        }
    }

    pub fn single_labels(self) -> [&'static str; 2] {
        match self {
            BasisId::Z => ["H", "V"],
            BasisId::X => ["P", "M"],
            BasisId::Y => ["R", "L"],
        }
    }

    /// Two-photon labels in table order, e.g. `PP, PM, MP, MM`.
    pub fn labels(self) -> [String; 4] {
        let l = self.single_labels();
        std::array::from_fn(|k| format!("{}{}", l[k / 2], l[k % 2]))
    }

    /// Two-photon basis state `k` in the `HH, HV, VH, VV` representation.
    pub fn state(self, k: usize) -> Vector4<C64> {
        let b = self.single();
        let (u, v) = (b[k / 2], b[k % 2]);
        Vector4::new(u[0] * v[0], u[0] * v[1], u[1] * v[0], u[1] * v[1])
    }

    pub fn states(self) -> [Vector4<C64>; 4] {
        std::array::from_fn(|k| self.state(k))
    }
}

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisId::Z => "Z",
            BasisId::X => "X",
            BasisId::Y => "Y",
        })
    }
}

impl FromStr for BasisId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Z" => Ok(BasisId::Z),
            "X" => Ok(BasisId::X),
            "Y" => Ok(BasisId::Y),
            _ => Err(Error::Config(format!("unknown basis '{s}'"))),
        }
    }
}

/// The three basis pairs measured on the filter.
pub const MEASURED_PAIRS: [(BasisId, BasisId); 3] = [
    (BasisId::Z, BasisId::Z),
    (BasisId::X, BasisId::Y),
    (BasisId::X, BasisId::X),
];

/// Rows: input basis states; columns: detected outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub in_basis: BasisId,
    pub out_basis: BasisId,
    pub values: [[f64; 4]; 4],
}

impl TruthTable {
    pub fn new(in_basis: BasisId, out_basis: BasisId, values: [[f64; 4]; 4]) -> Result<Self> {
        for row in &values {
            for &v in row {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!(
                        "truth-table entry {v} is not a non-negative number"
                    )));
                }
            }
        }
        Ok(TruthTable {
            in_basis,
            out_basis,
            values,
        })
    }

    /// Integer count table.
    pub fn from_counts(in_basis: BasisId, out_basis: BasisId, counts: [[u64; 4]; 4]) -> Self {
        let values = counts.map(|row| row.map(|c| c as f64));
        TruthTable {
            in_basis,
            out_basis,
            values,
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().flatten().sum()
    }

    pub fn row_total(&self, k: usize) -> f64 {
        self.values[k].iter().sum()
    }

    pub fn label(&self) -> String {
        format!("{}->{}", self.in_basis, self.out_basis)
    }
}

/// Which outcomes count as correct for each input of a basis pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectOutcomeRule {
    pub in_basis: BasisId,
    pub out_basis: BasisId,
    pub correct: [[bool; 4]; 4],
}

impl CorrectOutcomeRule {
    /// Rules for the three measured pairs; `None` for any other pair.
    pub fn for_pair(in_basis: BasisId, out_basis: BasisId) -> Option<Self> {
        let (t, f) = (true, false);
        let correct = match (in_basis, out_basis) {
            (BasisId::Z, BasisId::Z) => [[t, f, f, f], [f, f, f, f], [f, f, f, f], [f, f, f, t]],
            // PP, MM -> RR, LL; PM, MP -> RL, LR.
            (BasisId::X, BasisId::Y) => [[t, f, f, t], [f, t, t, f], [f, t, t, f], [t, f, f, t]],
            // PP, MM -> PM, MP; PM, MP -> PP, MM.
            (BasisId::X, BasisId::X) => [[f, t, t, f], [t, f, f, t], [t, f, f, t], [f, t, t, f]],
            _ => return None,
        };
        Some(CorrectOutcomeRule {
            in_basis,
            out_basis,
            correct,
        })
    }

    pub fn is_correct(&self, input: usize, outcome: usize) -> bool {
        self.correct[input][outcome]
    }
}

/// Transmission table of a heralded map: `|<out_l| M |in_k>|^2`.
pub fn truth_table(map: &HeraldedMap, in_basis: BasisId, out_basis: BasisId) -> TruthTable {
    let mut values = [[0.0; 4]; 4];
    for (k, row) in values.iter_mut().enumerate() {
        let out = map.apply(&in_basis.state(k));
        for (l, cell) in row.iter_mut().enumerate() {
            *cell = out_basis.state(l).dotc(&out).norm_sqr();
        }
    }
    TruthTable {
        in_basis,
        out_basis,
        values,
    }
}

/// Transmission table from conditional output states, one per input.
pub fn truth_table_from_outputs(
    outputs: &[TwoQubitDensityMatrix; 4],
    in_basis: BasisId,
    out_basis: BasisId,
) -> TruthTable {
    let mut values = [[0.0; 4]; 4];
    for (row, rho) in values.iter_mut().zip(outputs) {
        for (l, cell) in row.iter_mut().enumerate() {
            *cell = rho.expectation(&out_basis.state(l)).max(0.0);
        }
    }
    TruthTable {
        in_basis,
        out_basis,
        values,
    }
}

/// How table fidelities combine the four inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FidelityMode {
    /// Correct events over all events.
    #[default]
    Pooled,
    /// Mean of the per-input ratios, over inputs with any transmission.
    PerInput,
}

/// Fraction of transmitted events that land in correct cells, pooled over
/// all inputs.
pub fn fidelity_from_table(table: &TruthTable, rule: &CorrectOutcomeRule) -> Result<f64> {
    fidelity_from_table_with(table, rule, FidelityMode::Pooled)
}

pub fn fidelity_from_table_with(
    table: &TruthTable,
    rule: &CorrectOutcomeRule,
    mode: FidelityMode,
) -> Result<f64> {
    let correct_in_row = |k: usize| -> f64 {
        (0..4)
            .filter(|&l| rule.is_correct(k, l))
            .map(|l| table.values[k][l])
            .sum()
    };
    match mode {
        FidelityMode::Pooled => {
            let total = table.total();
            if total <= 0.0 {
                return Err(Error::UndefinedFidelity(format!(
                    "table {} has no transmitted events",
                    table.label()
                )));
            }
            Ok((0..4).map(correct_in_row).sum::<f64>() / total)
        }
        FidelityMode::PerInput => {
            let ratios: Vec<f64> = (0..4)
                .filter(|&k| table.row_total(k) > 0.0)
                .map(|k| correct_in_row(k) / table.row_total(k))
                .collect();
            if ratios.is_empty() {
                return Err(Error::UndefinedFidelity(format!(
                    "table {} has no transmitted events",
                    table.label()
                )));
            }
            Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }
}

/// Fidelity of a table under the rule of its own basis pair.
pub fn table_fidelity(table: &TruthTable) -> Result<f64> {
    let rule = CorrectOutcomeRule::for_pair(table.in_basis, table.out_basis)
        .ok_or_else(|| Error::Config(format!("no correct-outcome rule for {}", table.label())))?;
    fidelity_from_table(table, &rule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub f_zz: f64,
    pub f_xy: f64,
    pub f_xx: f64,
    /// Weight of the intended operation.
    pub f_p: f64,
    /// Entanglement capability `2 F_p - 1`.
    pub c: f64,
    pub eta_zz: f64,
    pub eta_xy: f64,
    pub eta_xx: f64,
    /// Non-empty when the fidelities imply a negative process weight.
    pub warnings: Vec<String>,
}

impl ProcessReport {
    pub fn is_consistent(&self) -> bool {
        self.warnings.is_empty()
    }

    /// `F_p + eta_zz + eta_xy + eta_xx`, equal to 1 by construction.
    pub fn weight_sum(&self) -> f64 {
        self.f_p + self.eta_zz + self.eta_xy + self.eta_xx
    }
}

/// Decomposes the three measured fidelities into the diagonal process
/// weights.
pub fn process_report(f_zz: f64, f_xy: f64, f_xx: f64) -> Result<ProcessReport> {
    for (name, f) in [("F_zz", f_zz), ("F_xy", f_xy), ("F_xx", f_xx)] {
        if !(-crate::VALIDATION_TOL..=1.0 + crate::VALIDATION_TOL).contains(&f) {
            return Err(Error::Validation(format!("{name} = {f} outside [0, 1]")));
        }
    }
    let f_p = (f_zz + f_xy + f_xx - 1.0) / 2.0;
    let (eta_zz, eta_xy, eta_xx) = (f_zz - f_p, f_xy - f_p, f_xx - f_p);
    let mut warnings = Vec::new();
    if f_p < -CONSISTENCY_TOL {
        warnings.push(format!("inconsistent fidelities: F_p = {f_p:.6} < 0"));
    }
    for (name, eta) in [("eta_zz", eta_zz), ("eta_xy", eta_xy), ("eta_xx", eta_xx)] {
        if eta < -CONSISTENCY_TOL {
            warnings.push(format!("inconsistent fidelities: {name} = {eta:.6} < 0"));
        }
    }
    Ok(ProcessReport {
        f_zz,
        f_xy,
        f_xx,
        f_p,
        c: 2.0 * f_p - 1.0,
        eta_zz,
        eta_xy,
        eta_xx,
        warnings,
    })
}

/// Index into [`error_operators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorOperator {
    Ideal,
    Zz,
    Xy,
    Xx,
}

impl ErrorOperator {
    pub const ALL: [ErrorOperator; 4] = [
        ErrorOperator::Ideal,
        ErrorOperator::Zz,
        ErrorOperator::Xy,
        ErrorOperator::Xx,
    ];

    pub fn matrix(self) -> Matrix4<C64> {
        let r2 = std::f64::consts::SQRT_2;
        let d = match self {
            ErrorOperator::Ideal => [r2, 0.0, 0.0, -r2],
            ErrorOperator::Zz => [r2, 0.0, 0.0, r2],
            ErrorOperator::Xy => [0.0, r2, r2, 0.0],
            ErrorOperator::Xx => [0.0, r2, -r2, 0.0],
        };
        Matrix4::from_diagonal(&Vector4::from_iterator(d.iter().map(|&x| C64::new(x, 0.0))))
    }
}

/// The four diagonal operators `S_0, S_zz, S_xy, S_xx`.
pub fn error_operators() -> [Matrix4<C64>; 4] {
    ErrorOperator::ALL.map(ErrorOperator::matrix)
}

/// `sum_n chi_n S_n rho S_n^dag`, a process diagonal in the error-operator
/// basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalChiProcess {
    pub chi: [f64; 4],
}

impl DiagonalChiProcess {
    pub fn new(chi: [f64; 4]) -> Result<Self> {
        if chi.iter().any(|&c| c < 0.0)
            || (chi.iter().sum::<f64>() - 1.0).abs() > crate::VALIDATION_TOL
        {
            return Err(Error::Validation(format!(
                "chi weights {chi:?} must be non-negative and sum to 1"
            )));
        }
        Ok(DiagonalChiProcess { chi })
    }

    pub fn apply(&self, rho: &Matrix4<C64>) -> Matrix4<C64> {
        ErrorOperator::ALL
            .iter()
            .zip(self.chi)
            .map(|(op, w)| {
                let s = op.matrix();
                s * rho * s.adjoint() * C64::new(w, 0.0)
            })
            .sum()
    }

    /// Output for each input basis state.
    pub fn outputs(&self, in_basis: BasisId) -> [TwoQubitDensityMatrix; 4] {
        std::array::from_fn(|k| {
            let v = in_basis.state(k);
            TwoQubitDensityMatrix(self.apply(&(v * v.adjoint())))
        })
    }
}

/// Fidelity as the correct-outcome weight summed over inputs, normalized by
/// the total transmitted weight.
pub fn averaged_fidelity(
    outputs: &[TwoQubitDensityMatrix; 4],
    in_basis: BasisId,
    out_basis: BasisId,
) -> Result<f64> {
    let rule = CorrectOutcomeRule::for_pair(in_basis, out_basis).ok_or_else(|| {
        Error::Config(format!(
            "no correct-outcome rule for {in_basis}->{out_basis}"
        ))
    })?;
    let out_states = out_basis.states();
    let mut correct = 0.0;
    let mut total = 0.0;
    for (k, rho) in outputs.iter().enumerate() {
        total += rho.trace();
        for (l, s) in out_states.iter().enumerate() {
            if rule.is_correct(k, l) {
                correct += rho.expectation(s);
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::UndefinedFidelity("no transmitted weight".into()));
    }
    Ok(correct / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    /// Fraction of Z->Z weight in polarization-changing cells.
    pub fraction: f64,
    pub threshold: f64,
    pub valid: bool,
}

/// Fraction of transmitted Z->Z weight in off-diagonal (polarization
/// changing) cells.
pub fn assumption_check(zz_table: &TruthTable) -> f64 {
    let total = zz_table.total();
    if total <= 0.0 {
        return 0.0;
    }
    let diag: f64 = (0..4).map(|k| zz_table.values[k][k]).sum();
    (total - diag) / total
}

pub fn assumption_check_with(zz_table: &TruthTable, threshold: f64) -> AssumptionCheck {
    let fraction = assumption_check(zz_table);
    AssumptionCheck {
        fraction,
        threshold,
        valid: fraction < threshold,
    }
}

/// Wootters concurrence of a (possibly sub-normalized) two-qubit state.
pub fn concurrence(rho: &TwoQubitDensityMatrix) -> Result<f64> {
    let rho = rho.normalized()?.0;
    let rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    // sigma_y (x) sigma_y in the HH, HV, VH, VV basis.
    let mut yy = Matrix4::<C64>::zeros();
    yy[(0, 3)] = C64::new(-1.0, 0.0);
    yy[(1, 2)] = C64::new(1.0, 0.0);
    yy[(2, 1)] = C64::new(1.0, 0.0);
    yy[(3, 0)] = C64::new(-1.0, 0.0);
    let tilde = yy * rho.conjugate() * yy;
    let eig = SymmetricEigen::new(rho);
    let sqrt_vals = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let sqrt_rho =
        eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
    let m = sqrt_rho * tilde * sqrt_rho;
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut lambda: Vec<f64> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bases_are_orthonormal() {
        for b in BasisId::ALL {
            for i in 0..4 {
                for j in 0..4 {
                    let ip = b.state(i).dotc(&b.state(j));
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((ip - C64::new(target, 0.0)).norm(), 0.0, epsilon = 1e-15);
                }
            }
        }
        assert_eq!(BasisId::Y.labels(), ["RR", "RL", "LR", "LL"]);
    }

    #[test]
    fn ideal_tables() {
        let m = HeraldedMap::ideal();
        let zz = truth_table(&m, BasisId::Z, BasisId::Z);
        assert_abs_diff_eq!(zz.values[0][0], 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zz.values[3][3], 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(zz.total(), 1.0 / 8.0, epsilon = 1e-15);

        let xy = truth_table(&m, BasisId::X, BasisId::Y);
        // (HH - VV)/8 projected on RR or LL: (1/8)^2 each, 1/32 in total.
        assert_abs_diff_eq!(xy.values[0][0], 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xy.values[0][3], 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xy.row_total(0), 1.0 / 32.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xy.values[0][1], 0.0, epsilon = 1e-15);

        let xx = truth_table(&m, BasisId::X, BasisId::X);
        assert_abs_diff_eq!(xx.values[0][1], 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xx.values[0][2], 1.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xx.values[0][0], 0.0, epsilon = 1e-15);

        for t in [&zz, &xy, &xx] {
            assert_abs_diff_eq!(table_fidelity(t).unwrap(), 1.0, epsilon = 1e-12);
            assert!(t.values.iter().flatten().all(|&v| v <= 1.0 / 16.0 + 1e-10));
        }
    }

    #[test]
    fn uniform_table_fidelity() {
        let t = TruthTable::new(BasisId::Z, BasisId::Z, [[1.0; 4]; 4]).unwrap();
        assert_abs_diff_eq!(table_fidelity(&t).unwrap(), 0.125, epsilon = 1e-15);
        let empty = TruthTable::new(BasisId::Z, BasisId::Z, [[0.0; 4]; 4]).unwrap();
        assert!(matches!(
            table_fidelity(&empty),
            Err(Error::UndefinedFidelity(_))
        ));
        assert!(TruthTable::new(BasisId::Z, BasisId::Z, [[-1.0; 4]; 4]).is_err());
    }

    #[test]
    fn per_input_mode_differs_from_pooled() {
        let t = TruthTable::new(
            BasisId::Z,
            BasisId::Z,
            [
                [9.0, 1.0, 0.0, 0.0],
                [0.0; 4],
                [0.0; 4],
                [0.0, 0.0, 1.0, 1.0],
            ],
        )
        .unwrap();
        let rule = CorrectOutcomeRule::for_pair(BasisId::Z, BasisId::Z).unwrap();
        assert_abs_diff_eq!(
            fidelity_from_table(&t, &rule).unwrap(),
            10.0 / 12.0,
            epsilon = 1e-15
        );
        let per = fidelity_from_table_with(&t, &rule, FidelityMode::PerInput).unwrap();
        assert_abs_diff_eq!(per, (0.9 + 0.5) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn process_report_arithmetic() {
        let r = process_report(1.0, 1.0, 1.0).unwrap();
        assert_eq!((r.f_p, r.c), (1.0, 1.0));
        assert!(r.is_consistent());
        let r = process_report(0.5, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(r.f_p, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.c, -0.5, epsilon = 1e-15);
        let r = process_report(0.2, 0.2, 0.2).unwrap();
        assert!(!r.is_consistent());
        assert_abs_diff_eq!(r.f_p, -0.2, epsilon = 1e-15);
        assert!(process_report(1.2, 0.5, 0.5).is_err());
    }

    #[test]
    fn error_operators_are_orthogonal() {
        let ops = error_operators();
        for (n, a) in ops.iter().enumerate() {
            for (m, b) in ops.iter().enumerate() {
                let hs = (a.adjoint() * b).trace();
                let target = if n == m { 4.0 } else { 0.0 };
                assert_abs_diff_eq!((hs - C64::new(target, 0.0)).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn chi_process_fidelities_follow_weights() {
        let zz_only = DiagonalChiProcess::new([0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            averaged_fidelity(&zz_only.outputs(BasisId::Z), BasisId::Z, BasisId::Z).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            averaged_fidelity(&zz_only.outputs(BasisId::X), BasisId::X, BasisId::Y).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            averaged_fidelity(&zz_only.outputs(BasisId::X), BasisId::X, BasisId::X).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        let chi = [0.54, 0.26, 0.14, 0.06];
        let p = DiagonalChiProcess::new(chi).unwrap();
        let f: Vec<f64> = MEASURED_PAIRS
            .iter()
            .map(|&(i, o)| averaged_fidelity(&p.outputs(i), i, o).unwrap())
            .collect();
        assert_abs_diff_eq!(f[0], 0.80, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 0.68, epsilon = 1e-12);
        assert_abs_diff_eq!(f[2], 0.60, epsilon = 1e-12);
        for (&(i, o), fa) in MEASURED_PAIRS.iter().zip(&f) {
            let t = truth_table_from_outputs(&p.outputs(i), i, o);
            assert_abs_diff_eq!(table_fidelity(&t).unwrap(), *fa, epsilon = 1e-12);
        }
        assert!(DiagonalChiProcess::new([0.5, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn assumption_check_extremes() {
        let zz = truth_table(&HeraldedMap::ideal(), BasisId::Z, BasisId::Z);
        assert_eq!(assumption_check(&zz), 0.0);
        let mut worst = [[0.0; 4]; 4];
        worst[0][3] = 5.0;
        let t = TruthTable::new(BasisId::Z, BasisId::Z, worst).unwrap();
        assert_eq!(assumption_check(&t), 1.0);
        assert!(!assumption_check_with(&t, DEFAULT_ASSUMPTION_THRESHOLD).valid);
    }

    #[test]
    fn concurrence_reference_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = Vector4::new(
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-s, 0.0),
        );
        let c = concurrence(&TwoQubitDensityMatrix::from_pure(&bell)).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-12);
        let product = BasisId::X.state(0);
        assert_abs_diff_eq!(
            concurrence(&TwoQubitDensityMatrix::from_pure(&product)).unwrap(),
            0.0,
            epsilon = 1e-7
        );
        // Werner state with p = 1/2: C = (3p - 1)/2.
        let w = TwoQubitDensityMatrix::from_pure(&bell)
            .scaled(0.5)
            .add(&TwoQubitDensityMatrix(
                Matrix4::identity() * C64::new(0.125, 0.0),
            ));
        assert_abs_diff_eq!(concurrence(&w).unwrap(), 0.25, epsilon = 1e-12);
    }
}
