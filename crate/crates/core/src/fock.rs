//! Modes, photons and sparse Fock states.
//!
//! A mode is a `(spatial path, polarization, internal label)` triple. The
//! internal label indexes an orthonormal basis of a degree of freedom the
//! optics never touch (spectral/temporal shape); partially distinguishable
//! photons are photons whose internal states are not parallel.
//!
//! Modes are indexed canonically: paths in lexicographic order, then `H`
//! before `V`, then internal index.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::elements::ModeUnitary;
use crate::{Error, Result, C64, PRUNE_TOL, VALIDATION_TOL};

/// Internal-space dimension used when none is given: one orthogonal
/// direction per photon of a four-photon experiment.
pub const DEFAULT_INTERNAL_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn from_index(index: usize) -> Polarization {
        if index == 0 {
            Polarization::H
        } else {
            Polarization::V
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Polarization::H),
            "V" | "v" => Ok(Polarization::V),
            other => Err(Error::Config(format!("unknown polarization '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub path: String,
    pub pol: Polarization,
    pub internal: usize,
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.path, self.pol, self.internal)
    }
}

/// The ordered set of modes every state and circuit refers to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    paths: Vec<String>,
    internal_dim: usize,
}

impl ModeRegistry {
    pub fn new<I, S>(paths: I, internal_dim: usize) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if internal_dim == 0 {
            return Err(Error::Validation(
                "internal dimension must be at least 1".into(),
            ));
        }
        let mut paths: Vec<String> = paths.into_iter().map(Into::into).collect();
        if let Some(empty) = paths.iter().find(|p| p.is_empty()) {
            return Err(Error::Config(format!("invalid empty path label '{empty}'")));
        }
        paths.sort();
        if let Some(w) = paths.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate path '{}'", w[0])));
        }
        let modes = paths.len() * 2 * internal_dim;
        if modes > u16::MAX as usize {
            return Err(Error::Validation(format!(
                "{modes} modes exceed the supported maximum"
            )));
        }
        Ok(Arc::new(ModeRegistry {
            paths,
            internal_dim,
        }))
    }

    /// Number of modes.
    pub fn len(&self) -> usize {
        self.paths.len() * 2 * self.internal_dim
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn path_index(&self, path: &str) -> Option<usize> {
        self.paths.binary_search_by(|p| p.as_str().cmp(path)).ok()
    }

    pub fn require_path(&self, path: &str) -> Result<usize> {
        self.path_index(path)
            .ok_or_else(|| Error::Config(format!("unknown path '{path}'")))
    }

    /// Mode index from a path index.
    pub fn index_of(&self, path: usize, pol: Polarization, internal: usize) -> usize {
        (path * 2 + pol.index()) * self.internal_dim + internal
    }

    pub fn mode_index(&self, path: &str, pol: Polarization, internal: usize) -> Result<usize> {
        let p = self.require_path(path)?;
        if internal >= self.internal_dim {
            return Err(Error::Config(format!(
                "internal index {internal} out of range for dimension {}",
                self.internal_dim
            )));
        }
        Ok(self.index_of(p, pol, internal))
    }

    /// `(path index, polarization, internal index)` of a mode.
    pub fn decompose(&self, mode: usize) -> (usize, Polarization, usize) {
        let internal = mode % self.internal_dim;
        let pp = mode / self.internal_dim;
        (pp / 2, Polarization::from_index(pp % 2), internal)
    }

    pub fn mode(&self, index: usize) -> ModeId {
        let (p, pol, internal) = self.decompose(index);
        ModeId {
            path: self.paths[p].clone(),
            pol,
            internal,
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeId> + '_ {
        (0..self.len()).map(|i| self.mode(i))
    }
}

/// A unit vector in the internal (distinguishability) space.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalState {
    coeffs: Vec<C64>,
}

impl InternalState {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Validation(
                "internal state must have at least one component".into(),
            ));
        }
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::Validation(format!(
                "internal state is not normalized (|psi|^2 = {norm_sqr})"
            )));
        }
        Ok(InternalState { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Basis vector `e_k`.
    pub fn basis(k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = C64::new(1.0, 0.0);
        InternalState { coeffs }
    }

    /// `x e_0 + sqrt(1 - x^2) e_1`: overlap `x` with `e_0`.
    pub fn with_overlap(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Validation(format!("overlap {x} outside [0, 1]")));
        }
        Self::from_real(&[x, (1.0 - x * x).max(0.0).sqrt()])
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &InternalState) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonInput {
    pub path: String,
    pub pol: Polarization,
    pub internal: InternalState,
}

impl PhotonInput {
    pub fn new(path: impl Into<String>, pol: Polarization, internal: InternalState) -> Self {
        PhotonInput {
            path: path.into(),
            pol,
            internal,
        }
    }

    /// A photon in internal basis state `e_0`.
    pub fn ideal(path: impl Into<String>, pol: Polarization) -> Self {
        Self::new(path, pol, InternalState::basis(0))
    }
}

/// Occupation numbers over every registry mode.
///
/// Stored as the sorted multiset of occupied mode indices, which is what
/// hashing and ordering need; [`OccupationVector::counts`] gives the dense
/// per-mode view.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector {
    photons: SmallVec<[u16; 8]>,
    num_modes: usize,
}

impl OccupationVector {
    pub fn vacuum(num_modes: usize) -> Self {
        OccupationVector {
            photons: SmallVec::new(),
            num_modes,
        }
    }

    pub fn from_counts(counts: &[u32]) -> Self {
        let mut photons = SmallVec::new();
        for (mode, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                photons.push(mode as u16);
            }
        }
        OccupationVector {
            photons,
            num_modes: counts.len(),
        }
    }

    /// Builds from a list of occupied modes (one entry per photon, any order).
    pub fn from_modes<I: IntoIterator<Item = usize>>(num_modes: usize, modes: I) -> Result<Self> {
        let mut photons: SmallVec<[u16; 8]> = SmallVec::new();
        for m in modes {
            if m >= num_modes {
                return Err(Error::Validation(format!(
                    "mode {m} out of range for {num_modes} modes"
                )));
            }
            photons.push(m as u16);
        }
        photons.sort_unstable();
        Ok(OccupationVector { photons, num_modes })
    }

    fn from_sorted(num_modes: usize, photons: SmallVec<[u16; 8]>) -> Self {
        OccupationVector { photons, num_modes }
    }

    /// Number of registry modes (length of the dense vector).
    pub fn len(&self) -> usize {
        self.num_modes
    }

    pub fn is_empty(&self) -> bool {
        self.num_modes == 0
    }

    pub fn total(&self) -> usize {
        self.photons.len()
    }

    pub fn count(&self, mode: usize) -> u32 {
        self.photons.iter().filter(|&&m| m as usize == mode).count() as u32
    }

    pub fn counts(&self) -> Vec<u32> {
        let mut counts = vec![0; self.num_modes];
        for &m in &self.photons {
            counts[m as usize] += 1;
        }
        counts
    }

    /// Occupied mode indices, one entry per photon, ascending.
    pub fn photons(&self) -> &[u16] {
        &self.photons
    }

    /// `(mode, count)` for every occupied mode, ascending.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        let mut i = 0;
        std::iter::from_fn(move || {
            let m = *self.photons.get(i)?;
            let mut n = 0;
            while i < self.photons.len() && self.photons[i] == m {
                n += 1;
                i += 1;
            }
            Some((m as usize, n))
        })
    }

    /// `prod_k n_k!`.
    pub fn factorial_product(&self) -> f64 {
        self.occupied().map(|(_, n)| factorial(n)).product()
    }

    /// Keeps only photons whose mode satisfies `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        OccupationVector {
            photons: self
                .photons
                .iter()
                .copied()
                .filter(|&m| keep(m as usize))
                .collect(),
            num_modes: self.num_modes,
        }
    }
}

impl fmt::Debug for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, (m, n)) in self.occupied().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}^{n}")?;
        }
        f.write_str(">")
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Sparse superposition of occupation vectors.
///
/// Amplitudes with magnitude below [`PRUNE_TOL`] are dropped. States may be
/// sub-normalized (after heralding).
#[derive(Debug, Clone)]
pub struct FockState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<OccupationVector, C64>,
}

impl FockState {
    pub fn vacuum(registry: &Arc<ModeRegistry>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::vacuum(registry.len()), C64::new(1.0, 0.0));
        FockState {
            registry: registry.clone(),
            terms,
        }
    }

    /// The zero vector.
    pub fn zero(registry: &Arc<ModeRegistry>) -> Self {
        FockState {
            registry: registry.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(registry: &Arc<ModeRegistry>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, C64)>,
    {
        let mut map = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != registry.len() {
                return Err(Error::RegistryMismatch(format!(
                    "occupation vector has {} modes, registry has {}",
                    occ.len(),
                    registry.len()
                )));
            }
            *map.entry(occ).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        Ok(Self::pruned(registry.clone(), map))
    }

    fn pruned(registry: Arc<ModeRegistry>, mut terms: BTreeMap<OccupationVector, C64>) -> Self {
        terms.retain(|_, a| a.norm() >= PRUNE_TOL);
        FockState { registry, terms }
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> C64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn check_registry(&self, other: &ModeRegistry) -> Result<()> {
        if *self.registry == *other {
            Ok(())
        } else {
            Err(Error::RegistryMismatch(
                "state and operand refer to different mode registries".into(),
            ))
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect();
        Self::pruned(self.registry.clone(), terms)
    }

    pub fn add(&self, other: &FockState) -> Result<Self> {
        Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(1.0, 0.0), other)])
    }

    /// `sum_i c_i |psi_i>` over states sharing one registry.
    pub fn linear_combination(items: &[(C64, &FockState)]) -> Result<Self> {
        let (_, first) = items
            .first()
            .ok_or_else(|| Error::Validation("empty linear combination".into()))?;
        let registry = first.registry.clone();
        let mut terms = BTreeMap::new();
        for (c, state) in items {
            state.check_registry(&registry)?;
            for (occ, a) in &state.terms {
                *terms.entry(occ.clone()).or_insert(C64::new(0.0, 0.0)) += c * a;
            }
        }
        Ok(Self::pruned(registry, terms))
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < PRUNE_TOL {
            return Err(Error::Validation("cannot normalize the zero state".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// `|| self - other ||`.
    pub fn distance(&self, other: &FockState) -> Result<f64> {
        let diff =
            Self::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), other)])?;
        Ok(diff.norm())
    }
}

/// Linear form `sum_k c_k a_k^dagger` over mode indices.
type LinearForm = Vec<(u16, C64)>;

/// Multiplies out `prod_i (sum_k c_ik a_k^dagger)` into monomial coefficients.
fn expand_product(forms: &[&LinearForm]) -> BTreeMap<SmallVec<[u16; 8]>, C64> {
    let mut poly: BTreeMap<SmallVec<[u16; 8]>, C64> = BTreeMap::new();
    poly.insert(SmallVec::new(), C64::new(1.0, 0.0));
    for form in forms {
        let mut next = BTreeMap::new();
        for (mono, coef) in &poly {
            for &(k, c) in form.iter() {
                let pos = mono.partition_point(|&m| m <= k);
                let mut m = mono.clone();
                m.insert(pos, k);
                *next.entry(m).or_insert(C64::new(0.0, 0.0)) += coef * c;
            }
        }
        poly = next;
    }
    poly
}

/// Applies one creation operator per photon to vacuum and normalizes.
pub fn make_fock_input(photons: &[PhotonInput], registry: &Arc<ModeRegistry>) -> Result<FockState> {
    let d = registry.internal_dim();
    let mut forms: Vec<LinearForm> = Vec::with_capacity(photons.len());
    for photon in photons {
        let path = registry.require_path(&photon.path)?;
        let coeffs = photon.internal.coefficients();
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::Validation(format!(
                "internal state of photon at '{}' is not normalized",
                photon.path
            )));
        }
        if coeffs.iter().skip(d).any(|c| c.norm() > 0.0) {
            return Err(Error::Validation(format!(
                "internal state of photon at '{}' exceeds internal dimension {d}",
                photon.path
            )));
        }
        let form = coeffs
            .iter()
            .take(d)
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, &c)| (registry.index_of(path, photon.pol, i) as u16, c))
            .collect();
        forms.push(form);
    }
    let refs: Vec<&LinearForm> = forms.iter().collect();
    let n = registry.len();
    let terms = expand_product(&refs).into_iter().map(|(mono, coef)| {
        let occ = OccupationVector::from_sorted(n, mono);
        let amp = coef * occ.factorial_product().sqrt();
        (occ, amp)
    });
    FockState::from_terms(registry, terms)?.normalized()
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &FockState, b: &FockState) -> Result<C64> {
    a.check_registry(&b.registry)?;
    let (small, large, conj_small) = if a.terms.len() <= b.terms.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = C64::new(0.0, 0.0);
    for (occ, x) in &small.terms {
        if let Some(y) = large.terms.get(occ) {
            acc += if conj_small {
                x.conj() * y
            } else {
                y.conj() * x
            };
        }
    }
    Ok(acc)
}

/// Substitutes `a_j^dagger -> sum_k U_kj a_k^dagger` in every term.
pub fn apply_mode_unitary(state: &FockState, u: &ModeUnitary) -> Result<FockState> {
    state.check_registry(u.registry())?;
    let columns = u.sparse_columns();
    let n = state.registry.len();
    let mut out: BTreeMap<OccupationVector, C64> = BTreeMap::new();
    for (occ, amp) in &state.terms {
        let forms: Vec<&LinearForm> = occ
            .photons()
            .iter()
            .map(|&j| &columns[j as usize])
            .collect();
        let prefactor = amp / occ.factorial_product().sqrt();
        for (mono, coef) in expand_product(&forms) {
            let occ_out = OccupationVector::from_sorted(n, mono);
            let a = prefactor * coef * occ_out.factorial_product().sqrt();
            *out.entry(occ_out).or_insert(C64::new(0.0, 0.0)) += a;
        }
    }
    Ok(FockState::pruned(state.registry.clone(), out))
}
