//! Python bindings: build or parse circuits, run them on photon lists and
//! reproduce the filter analyses.

use entfilter::analysis::{self, TruthTable};
use entfilter::elements::{DetectorModel, HeraldedCircuit};
use entfilter::engine::{self, output_density_matrix, simulate_heralded};
use entfilter::filter::{self, FilterVariant, HeraldedMap};
use entfilter::format::{parse_circuit, parse_photons, serialize_circuit};
use entfilter::noise;
use entfilter::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pyentfilter, CircuitParseError, PyValueError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse(p) => CircuitParseError::new_err(p.to_string()),
        Error::Contract(_) | Error::Degenerate(_) | Error::CoherenceLoss(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn detector_model(number: Option<u32>) -> DetectorModel {
    number.map_or(DetectorModel::Threshold, DetectorModel::NumberResolving)
}

fn rows(t: &TruthTable) -> Vec<Vec<f64>> {
    t.values.iter().map(|r| r.to_vec()).collect()
}

/// HOM visibilities for photons of the same pair and of different pairs.
#[pyclass(name = "VisibilityParams", from_py_object)]
#[derive(Clone)]
struct PyVisibilityParams {
    inner: noise::VisibilityParams,
}

#[pymethods]
impl PyVisibilityParams {
    #[new]
    #[pyo3(signature = (v_same = 0.96, v_cross = 0.85))]
    fn new(v_same: f64, v_cross: f64) -> PyResult<Self> {
        Ok(PyVisibilityParams {
            inner: noise::VisibilityParams::new(v_same, v_cross).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn ideal() -> Self {
        PyVisibilityParams {
            inner: noise::VisibilityParams::ideal(),
        }
    }

    #[getter]
    fn v_same(&self) -> f64 {
        self.inner.v_same
    }

    #[getter]
    fn v_cross(&self) -> f64 {
        self.inner.v_cross
    }

    fn __repr__(&self) -> String {
        format!(
            "VisibilityParams(v_same={}, v_cross={})",
            self.inner.v_same, self.inner.v_cross
        )
    }
}

/// A circuit together with its detectors and monitored outputs.
#[pyclass(name = "Circuit")]
struct PyCircuit {
    inner: HeraldedCircuit,
}

#[pymethods]
impl PyCircuit {
    /// The built-in filter; `variant` is `"ppbs"` or `"original"`.
    #[staticmethod]
    #[pyo3(signature = (variant = "ppbs"))]
    fn filter(variant: &str) -> PyResult<Self> {
        let v: FilterVariant = variant.parse().map_err(to_py)?;
        Ok(PyCircuit {
            inner: filter::build_filter_circuit(v),
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyCircuit {
            inner: parse_circuit(text).map_err(|e| to_py(e.into()))?,
        })
    }

    fn to_text(&self) -> String {
        serialize_circuit(&self.inner)
    }

    #[getter]
    fn paths(&self) -> Vec<String> {
        self.inner.circuit.registry().paths().to_vec()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.inner.herald.outputs.clone()
    }

    /// Runs the photons given as `"path:pol[:overlap], ..."`. Returns a dict
    /// with the total herald probability, the per-outcome weights and, for
    /// two monitored outputs, the HH/HV/VH/VV weights.
    fn simulate<'py>(&self, py: Python<'py>, photons: &str) -> PyResult<Bound<'py, PyDict>> {
        let photons = parse_photons(photons).map_err(to_py)?;
        let result = simulate_heralded(&self.inner, &photons).map_err(to_py)?;
        let reg = self.inner.circuit.registry();
        let d = PyDict::new(py);
        d.set_item("probability", result.probability)?;
        let outcomes: Vec<(Vec<String>, f64)> = result
            .branches
            .iter()
            .map(|b| {
                let modes = b
                    .detector_occupation
                    .photons()
                    .iter()
                    .map(|&m| reg.mode(m as usize).to_string())
                    .collect();
                (modes, b.weight)
            })
            .collect();
        d.set_item("outcomes", outcomes)?;
        if let [o1, o2] = self.inner.herald.outputs.as_slice() {
            if result.probability > 0.0 {
                let (rho, _) = output_density_matrix(&result, (o1, o2)).map_err(to_py)?;
                let weights: Vec<f64> = (0..4).map(|k| rho.0[(k, k)].re).collect();
                d.set_item("output_weights", weights)?;
            }
        }
        Ok(d)
    }

    /// Heralded 4x4 polarization map and the success probability per
    /// Z-basis input.
    fn heralded_map(&self) -> PyResult<(Vec<Vec<Complex64>>, Vec<f64>)> {
        let m = filter::heralded_map(&self.inner.circuit, &self.inner.herald).map_err(to_py)?;
        let matrix = (0..4)
            .map(|i| (0..4).map(|j| m.matrix[(i, j)]).collect())
            .collect();
        Ok((matrix, m.success.to_vec()))
    }

    /// Largest entry-wise deviation of the heralded map from the target.
    fn map_deviation(&self) -> PyResult<f64> {
        let m = filter::heralded_map(&self.inner.circuit, &self.inner.herald).map_err(to_py)?;
        Ok(m.max_deviation(&HeraldedMap::ideal()))
    }

    /// Z->Z, X->Y and X->X tables plus pooled fidelities at the given
    /// visibilities.
    #[pyo3(signature = (params = None))]
    fn truth_tables<'py>(
        &self,
        py: Python<'py>,
        params: Option<PyVisibilityParams>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let params = params.map_or_else(noise::VisibilityParams::default, |p| p.inner);
        let t = noise::simulate_noisy_truth_tables_with(&self.inner, &params).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("zz", rows(&t.zz))?;
        d.set_item("xy", rows(&t.xy))?;
        d.set_item("xx", rows(&t.xx))?;
        d.set_item("fidelities", t.fidelities().map_err(to_py)?.to_vec())?;
        Ok(d)
    }

    /// Double-pair ancilla background: herald probability and HH/HV/VH/VV
    /// weights. `number_resolving=n` switches to detectors accepting exactly
    /// `n` photons.
    #[pyo3(signature = (params = None, number_resolving = None))]
    fn background(
        &self,
        params: Option<PyVisibilityParams>,
        number_resolving: Option<u32>,
    ) -> PyResult<(f64, Vec<f64>)> {
        let params = params.map_or_else(noise::VisibilityParams::default, |p| p.inner);
        let b = noise::background_double_pair_with(
            &self.inner,
            &params,
            detector_model(number_resolving),
        )
        .map_err(to_py)?;
        Ok((b.probability, b.weights.to_vec()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Circuit(paths={}, elements={})",
            self.inner.circuit.registry().num_paths(),
            self.inner.circuit.elements().len()
        )
    }
}

/// Process fidelity and error weights from the three basis fidelities.
#[pyfunction]
fn process_report<'py>(
    py: Python<'py>,
    f_zz: f64,
    f_xy: f64,
    f_xx: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::process_report(f_zz, f_xy, f_xx).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("f_p", r.f_p)?;
    d.set_item("c", r.c)?;
    d.set_item("eta_zz", r.eta_zz)?;
    d.set_item("eta_xy", r.eta_xy)?;
    d.set_item("eta_xx", r.eta_xx)?;
    d.set_item("warnings", r.warnings)?;
    Ok(d)
}

/// Coincidence probability of two photons on a 50/50 splitter.
#[pyfunction]
fn hom_coincidence(overlap: f64) -> PyResult<f64> {
    engine::hom_coincidence(overlap).map_err(to_py)
}

/// Permanent of a square complex matrix given as nested lists.
#[pyfunction]
fn permanent(matrix: Vec<Vec<Complex64>>) -> PyResult<Complex64> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(engine::permanent(&DMatrix::from_fn(n, n, |i, j| {
        matrix[i][j]
    })))
}

#[pymodule]
fn pyentfilter(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyVisibilityParams>()?;
    m.add_function(wrap_pyfunction!(process_report, m)?)?;
    m.add_function(wrap_pyfunction!(hom_coincidence, m)?)?;
    m.add_function(wrap_pyfunction!(permanent, m)?)?;
    m.add("CircuitParseError", m.py().get_type::<CircuitParseError>())?;
    Ok(())
}
