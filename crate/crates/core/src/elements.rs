//! Optical elements, mode unitaries and circuits.
//!
//! Conventions, fixed globally:
//!
//! * beam splitter, per polarization `p` with reflectance `R_p`:
//!   `a -> sqrt(1-R_p) a + i sqrt(R_p) b`, `b -> i sqrt(R_p) a + sqrt(1-R_p) b`;
//! * PBS is the beam splitter with `R_H = 0`, `R_V = 1`;
//! * half-wave plate at angle `t`: `[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`;
//! * quarter-wave plate at angle `t`: `R(t) diag(1, i) R(-t)`;
//! * phase shift: `H -> e^{i phi_H} H`, `V -> e^{i phi_V} V`.
//!
//! Matrices act on creation operators: column `j` of a unitary lists where
//! `a_j^dagger` goes.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fock::{ModeRegistry, Polarization};
use crate::{Error, Result, C64, VALIDATION_TOL};

/// An angle stored in degrees, the unit of the circuit file format.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg)
    }

    pub fn from_radians(rad: f64) -> Self {
        Angle(rad.to_degrees())
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElementKind {
    BeamSplitter { r_h: f64, r_v: f64 },
    Pbs,
    Hwp { theta: Angle },
    Qwp { theta: Angle },
    PhaseShift { phi_h: Angle, phi_v: Angle },
    PathSwap,
}

impl ElementKind {
    /// Partially polarizing splitter A: `R_H = 1/2`, `R_V = 1`.
    pub const PPBS_A: ElementKind = ElementKind::BeamSplitter { r_h: 0.5, r_v: 1.0 };
    /// Partially polarizing splitter B: `R_H = 1/2`, `R_V = 0` (V fully transmitted).
    pub const PPBS_B: ElementKind = ElementKind::BeamSplitter { r_h: 0.5, r_v: 0.0 };
    pub const BS_50_50: ElementKind = ElementKind::BeamSplitter { r_h: 0.5, r_v: 0.5 };

    /// Name used in the circuit file format.
    pub fn name(&self) -> &'static str {
        match self {
            ElementKind::BeamSplitter { .. } => "bs",
            ElementKind::Pbs => "pbs",
            ElementKind::Hwp { .. } => "hwp",
            ElementKind::Qwp { .. } => "qwp",
            ElementKind::PhaseShift { .. } => "phase",
            ElementKind::PathSwap => "swap",
        }
    }

    pub fn num_ports(&self) -> usize {
        match self {
            ElementKind::BeamSplitter { .. } | ElementKind::Pbs | ElementKind::PathSwap => 2,
            _ => 1,
        }
    }

    /// Splitter with the same reflectance for both polarizations.
    pub fn is_polarization_neutral_splitter(&self) -> bool {
        matches!(self, ElementKind::BeamSplitter { r_h, r_v } if r_h == r_v && *r_h > 0.0 && *r_h < 1.0)
    }

    /// Splitter that divides H evenly and routes V deterministically.
    pub fn is_partially_polarizing_splitter(&self) -> bool {
        matches!(self, ElementKind::BeamSplitter { r_h, r_v } if *r_h == 0.5 && (*r_v == 0.0 || *r_v == 1.0))
    }

    pub fn is_pbs(&self) -> bool {
        matches!(self, ElementKind::Pbs)
    }

    /// Jones-type 2x2 block for polarization `p` of a two-port element, as
    /// `[[aa, ab], [ba, bb]]` (row = output port, column = input port).
    fn two_port_block(&self, p: Polarization) -> [[C64; 2]; 2] {
        let r = match (self, p) {
            (ElementKind::BeamSplitter { r_h, .. }, Polarization::H) => *r_h,
            (ElementKind::BeamSplitter { r_v, .. }, Polarization::V) => *r_v,
            (ElementKind::Pbs, Polarization::H) => 0.0,
            (ElementKind::Pbs, Polarization::V) => 1.0,
            (ElementKind::PathSwap, _) => {
                let one = C64::new(1.0, 0.0);
                let zero = C64::new(0.0, 0.0);
                return [[zero, one], [one, zero]];
            }
            _ => unreachable!("not a two-port element"),
        };
        let t = C64::new((1.0 - r).sqrt(), 0.0);
        let ir = C64::new(0.0, r.sqrt());
        [[t, ir], [ir, t]]
    }

    /// Jones matrix (rows/columns H, V) of a one-port element.
    fn jones(&self) -> [[C64; 2]; 2] {
        let c = |x: f64| C64::new(x, 0.0);
        match self {
            ElementKind::Hwp { theta } => {
                let (s, co) = (2.0 * theta.radians()).sin_cos();
                [[c(co), c(s)], [c(s), c(-co)]]
            }
            ElementKind::Qwp { theta } => {
                let (s, co) = theta.radians().sin_cos();
                let i = C64::new(0.0, 1.0);
                // R(t) diag(1, i) R(-t)
                [
                    [c(co * co) + i * s * s, c(co * s) - i * co * s],
                    [c(co * s) - i * co * s, c(s * s) + i * co * co],
                ]
            }
            ElementKind::PhaseShift { phi_h, phi_v } => [
                [C64::from_polar(1.0, phi_h.radians()), c(0.0)],
                [c(0.0), C64::from_polar(1.0, phi_v.radians())],
            ],
            _ => unreachable!("not a one-port element"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Ports {
    One(String),
    Two(String, String),
}

impl Ports {
    pub fn paths(&self) -> Vec<&str> {
        match self {
            Ports::One(a) => vec![a],
            Ports::Two(a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub ports: Ports,
}

impl ElementSpec {
    pub fn two(kind: ElementKind, a: impl Into<String>, b: impl Into<String>) -> Self {
        ElementSpec {
            kind,
            ports: Ports::Two(a.into(), b.into()),
        }
    }

    pub fn one(kind: ElementKind, a: impl Into<String>) -> Self {
        ElementSpec {
            kind,
            ports: Ports::One(a.into()),
        }
    }

    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        let n = self.ports.paths().len();
        if n != self.kind.num_ports() {
            return Err(Error::Validation(format!(
                "element '{}' needs {} port(s), got {n}",
                self.kind.name(),
                self.kind.num_ports()
            )));
        }
        if let Ports::Two(a, b) = &self.ports {
            if a == b {
                return Err(Error::Validation(format!(
                    "element '{}' binds path '{a}' twice",
                    self.kind.name()
                )));
            }
        }
        for p in self.ports.paths() {
            registry.require_path(p)?;
        }
        match &self.kind {
            ElementKind::BeamSplitter { r_h, r_v } => {
                for r in [r_h, r_v] {
                    if !(0.0..=1.0).contains(r) {
                        return Err(Error::Validation(format!("reflectance {r} outside [0, 1]")));
                    }
                }
            }
            ElementKind::Hwp { theta } | ElementKind::Qwp { theta } => finite(theta.degrees())?,
            ElementKind::PhaseShift { phi_h, phi_v } => {
                finite(phi_h.degrees())?;
                finite(phi_v.degrees())?;
            }
            ElementKind::Pbs | ElementKind::PathSwap => {}
        }
        Ok(())
    }
}

fn finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("non-finite parameter {x}")))
    }
}

/// Unitary over all registry modes; identity on the internal label.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    registry: Arc<ModeRegistry>,
    matrix: DMatrix<C64>,
}

impl ModeUnitary {
    pub fn new(registry: &Arc<ModeRegistry>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = registry.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Validation(format!(
                "unitary is {}x{}, registry has {n} modes",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let u = ModeUnitary {
            registry: registry.clone(),
            matrix,
        };
        let err = u.unitarity_error();
        if err > VALIDATION_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (max |U^dag U - I| = {err:.3e})"
            )));
        }
        Ok(u)
    }

    pub fn identity(registry: &Arc<ModeRegistry>) -> Self {
        let n = registry.len();
        ModeUnitary {
            registry: registry.clone(),
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Lifts a matrix over `(path, polarization)` pairs to all modes by
    /// acting as the identity on the internal label.
    pub fn from_physical(registry: &Arc<ModeRegistry>, physical: &DMatrix<C64>) -> Result<Self> {
        let pp = registry.num_paths() * 2;
        if physical.nrows() != pp || physical.ncols() != pp {
            return Err(Error::Validation(format!(
                "physical matrix must be {pp}x{pp}, got {}x{}",
                physical.nrows(),
                physical.ncols()
            )));
        }
        // The lift is unitary exactly when the physical matrix is.
        let err = unitarity_error(physical);
        if err > VALIDATION_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (max |U^dag U - I| = {err:.3e})"
            )));
        }
        let d = registry.internal_dim();
        let n = registry.len();
        let mut m = DMatrix::zeros(n, n);
        for c in 0..pp {
            for r in 0..pp {
                let v = physical[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    for i in 0..d {
                        m[(r * d + i, c * d + i)] = v;
                    }
                }
            }
        }
        Ok(ModeUnitary {
            registry: registry.clone(),
            matrix: m,
        })
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix)
    }

    /// `self` followed by `next`, i.e. `next * self`.
    pub fn then(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        if *self.registry != *next.registry {
            return Err(Error::RegistryMismatch(
                "unitaries over different registries".into(),
            ));
        }
        Ok(ModeUnitary {
            registry: self.registry.clone(),
            matrix: &next.matrix * &self.matrix,
        })
    }

    /// True when every block between different internal labels is zero and
    /// all same-label blocks are identical.
    pub fn is_internal_block_diagonal(&self) -> bool {
        let d = self.registry.internal_dim();
        let n = self.dim();
        for c in 0..n {
            for r in 0..n {
                let (ri, ci) = (r % d, c % d);
                let v = self.matrix[(r, c)];
                if ri != ci {
                    if v != C64::new(0.0, 0.0) {
                        return false;
                    }
                } else if v != self.matrix[(r - ri, c - ci)] {
                    return false;
                }
            }
        }
        true
    }

    /// Non-zero entries of each column, as `(row, value)`.
    pub fn sparse_columns(&self) -> Vec<Vec<(u16, C64)>> {
        let n = self.dim();
        (0..n)
            .map(|c| {
                (0..n)
                    .filter_map(|r| {
                        let v = self.matrix[(r, c)];
                        (v != C64::new(0.0, 0.0)).then_some((r as u16, v))
                    })
                    .collect()
            })
            .collect()
    }
}

fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let prod = m.adjoint() * m;
    let mut worst: f64 = 0.0;
    for c in 0..prod.ncols() {
        for r in 0..prod.nrows() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Full-registry unitary of a single element.
pub fn element_unitary(spec: &ElementSpec, registry: &Arc<ModeRegistry>) -> Result<ModeUnitary> {
    ModeUnitary::from_physical(registry, &element_physical(spec, registry)?)
}

/// Element matrix over `(path, polarization)` pairs.
fn element_physical(spec: &ElementSpec, registry: &ModeRegistry) -> Result<DMatrix<C64>> {
    spec.validate(registry)?;
    let pp = registry.num_paths() * 2;
    let mut phys = DMatrix::<C64>::identity(pp, pp);
    let idx = |path: usize, pol: Polarization| path * 2 + pol.index();
    match &spec.ports {
        Ports::Two(a, b) => {
            let (a, b) = (registry.require_path(a)?, registry.require_path(b)?);
            for pol in Polarization::ALL {
                let blk = spec.kind.two_port_block(pol);
                let ports = [idx(a, pol), idx(b, pol)];
                for (r, &pr) in ports.iter().enumerate() {
                    for (c, &pc) in ports.iter().enumerate() {
                        phys[(pr, pc)] = blk[r][c];
                    }
                }
            }
        }
        Ports::One(a) => {
            let a = registry.require_path(a)?;
            let j = spec.kind.jones();
            let ports = [idx(a, Polarization::H), idx(a, Polarization::V)];
            for (r, &pr) in ports.iter().enumerate() {
                for (c, &pc) in ports.iter().enumerate() {
                    phys[(pr, pc)] = j[r][c];
                }
            }
        }
    }
    Ok(phys)
}

/// An ordered list of elements over a registry, with its input ports.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    registry: Arc<ModeRegistry>,
    elements: Vec<ElementSpec>,
    inputs: Vec<String>,
}

impl Circuit {
    pub fn new(
        registry: Arc<ModeRegistry>,
        elements: Vec<ElementSpec>,
        inputs: Vec<String>,
    ) -> Result<Self> {
        for e in &elements {
            e.validate(&registry)?;
        }
        for p in &inputs {
            registry.require_path(p)?;
        }
        Ok(Circuit {
            registry,
            elements,
            inputs,
        })
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn elements(&self) -> &[ElementSpec] {
        &self.elements
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    /// A copy with `extra` appended.
    pub fn with_appended(&self, extra: impl IntoIterator<Item = ElementSpec>) -> Result<Self> {
        let mut elements = self.elements.clone();
        elements.extend(extra);
        Circuit::new(self.registry.clone(), elements, self.inputs.clone())
    }

    pub fn count_elements(&self, pred: impl Fn(&ElementKind) -> bool) -> usize {
        self.elements.iter().filter(|e| pred(&e.kind)).count()
    }
}

/// Product of the element unitaries in circuit order.
pub fn compose_circuit(circuit: &Circuit) -> Result<ModeUnitary> {
    // Accumulate on the small physical matrix, then lift once.
    let reg = circuit.registry();
    let pp = reg.num_paths() * 2;
    let mut acc = DMatrix::<C64>::identity(pp, pp);
    for e in circuit.elements() {
        acc = element_physical(e, reg)? * acc;
    }
    ModeUnitary::from_physical(reg, &acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorModel {
    /// Fires on one or more photons.
    Threshold,
    /// Accepts exactly `n` photons.
    NumberResolving(u32),
}

impl DetectorModel {
    pub fn accepts(self, photons: u32) -> bool {
        match self {
            DetectorModel::Threshold => photons >= 1,
            DetectorModel::NumberResolving(n) => photons == n,
        }
    }
}

impl fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetectorModel::Threshold => f.write_str("threshold"),
            DetectorModel::NumberResolving(n) => write!(f, "number {n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorBinding {
    pub path: String,
    pub model: DetectorModel,
}

/// The detector pattern that signals success.
///
/// Detectors are polarization- and internal-label blind; every monitored
/// output must hold at least one photon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeraldSpec {
    pub detectors: Vec<DetectorBinding>,
    pub outputs: Vec<String>,
}

impl HeraldSpec {
    pub fn new(detectors: Vec<DetectorBinding>, outputs: Vec<String>) -> Result<Self> {
        for d in &detectors {
            if outputs.contains(&d.path) {
                return Err(Error::Validation(format!(
                    "path '{}' is both a detector and a monitored output",
                    d.path
                )));
            }
        }
        for (i, d) in detectors.iter().enumerate() {
            if detectors[..i].iter().any(|e| e.path == d.path) {
                return Err(Error::Validation(format!(
                    "duplicate detector on '{}'",
                    d.path
                )));
            }
        }
        for (i, o) in outputs.iter().enumerate() {
            if outputs[..i].contains(o) {
                return Err(Error::Validation(format!("duplicate output '{o}'")));
            }
        }
        Ok(HeraldSpec { detectors, outputs })
    }

    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        for d in &self.detectors {
            registry.require_path(&d.path)?;
        }
        for o in &self.outputs {
            registry.require_path(o)?;
        }
        Ok(())
    }

    /// Same paths with every detector switched to `model`.
    pub fn with_detector_model(&self, model: DetectorModel) -> Self {
        HeraldSpec {
            detectors: self
                .detectors
                .iter()
                .map(|d| DetectorBinding {
                    path: d.path.clone(),
                    model,
                })
                .collect(),
            outputs: self.outputs.clone(),
        }
    }
}

/// A circuit together with its herald.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldedCircuit {
    pub circuit: Circuit,
    pub herald: HeraldSpec,
}
