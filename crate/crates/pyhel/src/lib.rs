//! Python bindings: sets, energies, spectra, dual pairs, extraction pipelines and the check harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::Value;

use hel::generators::FamilySpec;
use hel::harness::{self, Input, Suite};
use hel::spectral::{build_symmetric, OperatorKind};
use hel::{energy as en, structure, FiniteSet, Group, GroupDescriptor};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let json = obj.py().import("json")?;
    let text: String = json.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(err)
}

/// A finite subset of `Z`, `Z/m`, `F2^n` or a product of these.
#[pyclass(name = "FiniteSet", module = "pyhel", frozen)]
struct PyFiniteSet {
    inner: FiniteSet,
}

#[pymethods]
impl PyFiniteSet {
    /// `FiniteSet("Z/12", [0, 1, 5])`; product elements are lists of coordinates.
    #[new]
    fn new(group: &str, elements: &Bound<'_, PyAny>) -> PyResult<Self> {
        let g = Group::new(GroupDescriptor::parse(group).map_err(err)?).map_err(err)?;
        let raw = from_py(elements)?;
        let items = raw.as_array().ok_or_else(|| err("elements must be a list"))?;
        let els = items.iter().map(|x| g.element_from_json(x)).collect::<hel::Result<Vec<_>>>().map_err(err)?;
        Ok(PyFiniteSet { inner: FiniteSet::new(g, els).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: Value = serde_json::from_str(text).map_err(err)?;
        Ok(PyFiniteSet { inner: FiniteSet::from_json(&v).map_err(err)?.0 })
    }

    /// Generates a member of a family, e.g. `convex:kind=squares:n=64`.
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        let g = FamilySpec::parse(spec).map_err(err)?.generate().map_err(err)?;
        Ok(PyFiniteSet { inner: g.set })
    }

    #[getter]
    fn group(&self) -> String {
        self.inner.group().descriptor().to_string()
    }

    fn elements(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.inner.to_json()["elements"])
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    fn sumset(&self, other: PyRef<'_, PyFiniteSet>) -> PyResult<Self> {
        Ok(PyFiniteSet { inner: self.inner.sumset(&other.inner).map_err(err)? })
    }

    fn diffset(&self, other: PyRef<'_, PyFiniteSet>) -> PyResult<Self> {
        Ok(PyFiniteSet { inner: self.inner.diffset(&other.inner).map_err(err)? })
    }

    fn negate(&self) -> Self {
        PyFiniteSet { inner: self.inner.negate() }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __eq__(&self, other: PyRef<'_, PyFiniteSet>) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("FiniteSet({}, |A| = {})", self.group(), self.inner.len())
    }
}

/// `E(A)`, or `E(A, B)` when `b` is given.
#[pyfunction]
#[pyo3(signature = (a, b = None))]
fn energy(a: PyRef<'_, PyFiniteSet>, b: Option<PyRef<'_, PyFiniteSet>>) -> PyResult<i128> {
    match b {
        None => Ok(en::energy(&a.inner)),
        Some(b) => en::energy_pair(&a.inner, &b.inner).map_err(err),
    }
}

/// `E_s(A)`; exact for integer `s`.
#[pyfunction]
fn energy_moment(py: Python<'_>, a: PyRef<'_, PyFiniteSet>, s: f64) -> PyResult<Py<PyAny>> {
    if s.fract() == 0.0 && s >= 1.0 {
        Ok(en::energy_moment_int(&a.inner, s as u32).into_pyobject(py)?.into_any().unbind())
    } else {
        Ok(en::energy_moment(&a.inner, s).into_pyobject(py)?.into_any().unbind())
    }
}

#[pyfunction]
fn t_energy(a: PyRef<'_, PyFiniteSet>, k: usize) -> PyResult<i128> {
    en::t_energy(&a.inner, k).map_err(err)
}

#[pyfunction]
fn sigma_k(a: PyRef<'_, PyFiniteSet>, k: usize) -> PyResult<i128> {
    en::sigma_k(&a.inner, k).map_err(err)
}

/// Energies, moments, doubling and the derived `K`, `M` of a set.
#[pyfunction]
fn energy_report(py: Python<'_>, a: PyRef<'_, PyFiniteSet>) -> PyResult<Py<PyAny>> {
    let r = en::energy_report(&a.inner, &[]).map_err(err)?;
    to_py(py, &serde_json::to_value(r).map_err(err)?)
}

/// Eigenvalues of `T^{A∘A}_A`, ordered by modulus.
#[pyfunction]
fn spectrum(a: PyRef<'_, PyFiniteSet>) -> PyResult<Vec<f64>> {
    let g = hel::convolution::autocorrelation(&a.inner).to_real();
    let dec = build_symmetric(OperatorKind::SymDifference, &a.inner, &g).map_err(err)?.decompose().map_err(err)?;
    Ok(dec.values)
}

/// Popular dual pair for `E_k` together with its checked bounds.
#[pyfunction]
#[pyo3(signature = (a, k = 2))]
fn dual_pair(py: Python<'_>, a: PyRef<'_, PyFiniteSet>, k: usize) -> PyResult<Py<PyAny>> {
    let (pair, rel) = hel::dual::dual_bounds_check(&a.inner, k).map_err(err)?;
    let v = serde_json::json!({
        "pair": pair.to_json(),
        "relations": rel.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    to_py(py, &v)
}

/// Runs `e3`, `e4m` or `e4t4` and returns the certificate.
#[pyfunction]
#[pyo3(signature = (pipeline, a, s = 2.0))]
fn extract(py: Python<'_>, pipeline: &str, a: PyRef<'_, PyFiniteSet>, s: f64) -> PyResult<Py<PyAny>> {
    let cert = match pipeline {
        "e3" => structure::pipeline_e3(&a.inner),
        "e4m" => structure::pipeline_e4m(&a.inner, s),
        "e4t4" => structure::pipeline_e4t4(&a.inner),
        other => return Err(err(format!("unknown pipeline `{other}`"))),
    }
    .map_err(err)?;
    to_py(py, &cert.to_json())
}

#[pyfunction]
fn convex_trace(py: Python<'_>, a: PyRef<'_, PyFiniteSet>) -> PyResult<Py<PyAny>> {
    to_py(py, &structure::convex_pipeline_trace(&a.inner).map_err(err)?.to_json())
}

/// Runs a check suite over family specs and returns the parsed JSON report.
#[pyfunction]
#[pyo3(signature = (suite, families, filter = None))]
fn verify(py: Python<'_>, suite: &str, families: Vec<String>, filter: Option<String>) -> PyResult<Py<PyAny>> {
    let inputs = families
        .iter()
        .map(|f| FamilySpec::parse(f).and_then(|s| Input::from_spec(&s)))
        .collect::<hel::Result<Vec<_>>>()
        .map_err(err)?;
    let suite = Suite::parse(suite).map_err(err)?;
    let results = py.detach(|| harness::run_suite(suite, &inputs, filter.as_deref(), false)).map_err(err)?;
    let v: Value = serde_json::from_str(&harness::report_json(&results)).map_err(err)?;
    to_py(py, &v)
}

#[pymodule]
fn pyhel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFiniteSet>()?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_moment, m)?)?;
    m.add_function(wrap_pyfunction!(t_energy, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_k, m)?)?;
    m.add_function(wrap_pyfunction!(energy_report, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(dual_pair, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(convex_trace, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
