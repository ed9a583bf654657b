//! Python bindings for `summatau`.
//!
//! Reports are returned as plain dicts with the same layout as the CLI JSON.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use summatau::{abel, cesaro, oscillation, probes, statistical};
use summatau::{FunctionSpec, Sequence, ToleranceProfile};

fn eval_err(e: summatau::Error) -> PyErr {
    match e {
        summatau::Error::Eval(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Tolerances; every keyword defaults to the library default.
#[pyclass(name = "ToleranceProfile", from_py_object)]
#[derive(Clone)]
struct PyProfile(ToleranceProfile);

#[pymethods]
impl PyProfile {
    #[new]
    #[pyo3(signature = (eps_tail=None, eps_conv=None, eps_witness=None, n_max=None, grid_depth=None, trust_heuristic=None))]
    fn new(
        eps_tail: Option<f64>,
        eps_conv: Option<f64>,
        eps_witness: Option<f64>,
        n_max: Option<u64>,
        grid_depth: Option<u32>,
        trust_heuristic: Option<bool>,
    ) -> PyResult<Self> {
        let d = ToleranceProfile::default();
        let p = ToleranceProfile {
            eps_tail: eps_tail.unwrap_or(d.eps_tail),
            eps_conv: eps_conv.unwrap_or(d.eps_conv),
            eps_witness: eps_witness.unwrap_or(d.eps_witness),
            n_max: n_max.unwrap_or(d.n_max),
            grid_depth: grid_depth.unwrap_or(d.grid_depth),
            trust_heuristic: trust_heuristic.unwrap_or(d.trust_heuristic),
        };
        p.validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self(p))
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

fn profile_of(p: Option<PyProfile>) -> ToleranceProfile {
    p.map_or_else(ToleranceProfile::default, |p| p.0)
}

#[pyclass(name = "Sequence", frozen)]
struct PySequence(Sequence);

#[pymethods]
impl PySequence {
    /// Parse a spec such as `"alternating(c=1)"`.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Sequence::parse(spec)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Wrap a finite list of terms.
    #[staticmethod]
    fn finite(label: String, terms: Vec<f64>) -> PyResult<Self> {
        Sequence::finite(label, terms)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `f(p_k)` for a function of `t`.
    fn map(&self, function: &str) -> PyResult<Self> {
        let f = FunctionSpec::parse(function).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self(Sequence::map(&f, &self.0)))
    }

    fn term(&self, k: u64) -> PyResult<f64> {
        self.0
            .term(k)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn prefix(&self, n: usize) -> PyResult<Vec<f64>> {
        self.0
            .prefix(n)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    #[getter]
    fn growth<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.growth())
    }

    fn __repr__(&self) -> String {
        format!("Sequence('{}')", self.0.label())
    }
}

#[pyfunction]
#[pyo3(signature = (seq, x, profile=None))]
fn abel_mean<'py>(
    py: Python<'py>,
    seq: &PySequence,
    x: f64,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = abel::abel_mean(&seq.0, x, &profile_of(profile)).map_err(eval_err)?;
    to_py(py, &p)
}

/// Abel means on the default grid, as a list of point dicts.
#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn mean_curve<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    let c = abel::mean_curve(&seq.0, &profile_of(profile)).map_err(eval_err)?;
    to_py(py, &c.points)
}

#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn abel_limit<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &abel::abel_limit(&seq.0, &profile_of(profile)).map_err(eval_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn cesaro_limit<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &cesaro::cesaro_limit(&seq.0, &profile_of(profile)).map_err(eval_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn st_limit<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &statistical::st_limit(&seq.0, &profile_of(profile)).map_err(eval_err)?,
    )
}

/// Lacunary statistical limit along `theta = [0, base, base^2, ...]`.
#[pyfunction]
#[pyo3(signature = (seq, base=2, profile=None))]
fn st_lacunary_limit<'py>(
    py: Python<'py>,
    seq: &PySequence,
    base: u64,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = profile_of(profile);
    let theta = statistical::powers(base, p.n_max).map_err(eval_err)?;
    to_py(
        py,
        &statistical::st_lacunary_limit(&seq.0, &theta, &p).map_err(eval_err)?,
    )
}

#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn is_slowly_oscillating<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    let (report, _) =
        oscillation::is_slowly_oscillating(&seq.0, &profile_of(profile)).map_err(eval_err)?;
    to_py(py, &report)
}

/// Abel-continuity probe of `function` on the default battery or on `battery`.
#[pyfunction]
#[pyo3(signature = (function, battery=None, profile=None))]
fn probe<'py>(
    py: Python<'py>,
    function: &str,
    battery: Option<Vec<String>>,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    let f = FunctionSpec::parse(function).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let seqs = match battery {
        None => probes::default_battery_sequences(),
        Some(specs) => specs
            .iter()
            .map(|s| Sequence::parse(s))
            .collect::<Result<_, _>>()
            .map_err(|e| PyValueError::new_err(e.to_string()))?,
    };
    let report =
        probes::probe_abel_continuity(&f, &seqs, &profile_of(profile)).map_err(eval_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (seq, profile=None))]
fn boundedness_probe<'py>(
    py: Python<'py>,
    seq: &PySequence,
    profile: Option<PyProfile>,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(
        py,
        &probes::boundedness_probe(&seq.0, &profile_of(profile)).map_err(eval_err)?,
    )
}

/// A `{-1, 1}`-valued sequence with Abel limit `t`.
#[pyfunction]
fn pm1_with_abel_limit(t: f64) -> PyResult<PySequence> {
    probes::pm1_with_abel_limit(t)
        .map(PySequence)
        .map_err(eval_err)
}

/// Canonical rendering of a function of `t`.
#[pyfunction]
fn parse_function(text: &str) -> PyResult<String> {
    FunctionSpec::parse(text)
        .map(|f| f.to_string())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule(name = "summatau")]
fn summatau_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PySequence>()?;
    m.add_function(wrap_pyfunction!(abel_mean, m)?)?;
    m.add_function(wrap_pyfunction!(mean_curve, m)?)?;
    m.add_function(wrap_pyfunction!(abel_limit, m)?)?;
    m.add_function(wrap_pyfunction!(cesaro_limit, m)?)?;
    m.add_function(wrap_pyfunction!(st_limit, m)?)?;
    m.add_function(wrap_pyfunction!(st_lacunary_limit, m)?)?;
    m.add_function(wrap_pyfunction!(is_slowly_oscillating, m)?)?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    m.add_function(wrap_pyfunction!(boundedness_probe, m)?)?;
    m.add_function(wrap_pyfunction!(pm1_with_abel_limit, m)?)?;
    m.add_function(wrap_pyfunction!(parse_function, m)?)?;
    Ok(())
}
