//! Python bindings for `squatcalc-core`.
//!
//! Quaternions cross the boundary as `Quaternion` objects or 4-sequences
//! `(w, x, y, z)`; reports come back as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyModule;

use squatcalc_core::calculus::{f_of_t_auto, f_of_t_unbounded_with, CalcOptions, QuadratureOptions};
use squatcalc_core::fixtures::Fixture;
use squatcalc_core::verify::{run_verify, VerifyOptions};
use squatcalc_core::{
    resolvent_equation_residual, s_left_inverse, s_resolvent, s_spectrum, Error, ImaginaryUnit, QuatMatrix as CoreMatrix,
    Quaternion as CoreQuaternion, SliceFunction as CoreFunction,
};

create_exception!(squatcalc, SquatcalcError, PyException, "Raised for every library error.");

fn err(e: Error) -> PyErr {
    SquatcalcError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    SquatcalcError::new_err(e.to_string())
}

/// Parses a serializable report into Python objects via the `json` module.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Quaternion", module = "squatcalc", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyQuaternion(CoreQuaternion);

/// Accepts a `Quaternion`, a real number or a 4-sequence.
fn quat(obj: &Bound<'_, PyAny>) -> PyResult<CoreQuaternion> {
    if let Ok(q) = obj.extract::<PyQuaternion>() {
        return Ok(q.0);
    }
    if let Ok(r) = obj.extract::<f64>() {
        return Ok(CoreQuaternion::real(r));
    }
    let [w, x, y, z]: [f64; 4] = obj.extract()?;
    Ok(CoreQuaternion::new(w, x, y, z))
}

#[pymethods]
impl PyQuaternion {
    #[new]
    #[pyo3(signature = (w = 0.0, x = 0.0, y = 0.0, z = 0.0))]
    fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self(CoreQuaternion::new(w, x, y, z))
    }

    #[getter]
    fn w(&self) -> f64 {
        self.0.w
    }
    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }
    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }
    #[getter]
    fn z(&self) -> f64 {
        self.0.z
    }

    fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(Self).map_err(err)
    }

    fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.0.w, self.0.x, self.0.y, self.0.z)
    }

    fn __add__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(self.0 + quat(other)?))
    }

    fn __sub__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(self.0 - quat(other)?))
    }

    fn __mul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(self.0 * quat(other)?))
    }

    fn __rmul__(&self, other: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(quat(other)? * self.0))
    }

    fn __neg__(&self) -> Self {
        Self(-self.0)
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        quat(other).is_ok_and(|q| q == self.0)
    }

    fn __repr__(&self) -> String {
        format!("Quaternion({}, {}, {}, {})", self.0.w, self.0.x, self.0.y, self.0.z)
    }
}

/// Square quaternionic matrix acting on `H^n` from the left, with scalars
/// multiplying vectors from the right.
#[pyclass(name = "QuatMatrix", module = "squatcalc", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyQuatMatrix(CoreMatrix);

#[pymethods]
impl PyQuatMatrix {
    /// From rows of entries, each entry anything `Quaternion`-like.
    #[new]
    fn new(rows: Vec<Vec<Bound<'_, PyAny>>>) -> PyResult<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(quat).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        CoreMatrix::from_rows(rows).map(Self).map_err(err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(CoreMatrix::identity(n))
    }

    /// Built-in operator, e.g. `"random:n=4,norm=1"` or `"derivative:n=8,h=0.1"`.
    #[staticmethod]
    #[pyo3(signature = (spec, seed = 0))]
    fn fixture(spec: &str, seed: u64) -> PyResult<Self> {
        Ok(Self(Fixture::parse(spec, seed).map_err(err)?.build()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn rows(&self) -> Vec<Vec<PyQuaternion>> {
        self.0.rows().into_iter().map(|r| r.into_iter().map(PyQuaternion).collect()).collect()
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<PyQuaternion> {
        let n = self.0.n();
        if idx.0 >= n || idx.1 >= n {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!("index {idx:?} out of range for n = {n}")));
        }
        Ok(PyQuaternion(self.0.entries()[idx.0 * n + idx.1]))
    }

    fn __matmul__(&self, other: &Self) -> PyResult<Self> {
        self.0.matmul(&other.0).map(Self).map_err(err)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.try_add(&other.0).map(Self).map_err(err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.try_sub(&other.0).map(Self).map_err(err)
    }

    fn __neg__(&self) -> Self {
        Self(-&self.0)
    }

    /// `M s`: the operator followed by right multiplication with `s`.
    fn scale_right(&self, s: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(self.0.scale_right(quat(s)?)))
    }

    /// `s M`: right multiplication with `s` followed by the operator.
    fn scale_left(&self, s: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Self(self.0.scale_left(quat(s)?)))
    }

    fn op_norm(&self) -> f64 {
        self.0.op_norm()
    }

    fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    fn invert(&self) -> PyResult<Self> {
        self.0.invert().map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("QuatMatrix(n={})", self.0.n())
    }
}

/// Slice function given by its JSON spec or one of the constructors.
#[pyclass(name = "SliceFunction", module = "squatcalc", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySliceFunction(CoreFunction);

#[pymethods]
impl PySliceFunction {
    /// e.g. `{"type": "intrinsic_rational", "num": [1], "den": [2, 1]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(json_err)
    }

    /// `sum q^n a_n`, coefficients in ascending order.
    #[staticmethod]
    fn polynomial(coeffs: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let c = coeffs.iter().map(quat).collect::<PyResult<Vec<_>>>()?;
        Ok(Self(CoreFunction::polynomial(c)))
    }

    /// `num(q) / den(q)` with real ascending coefficients.
    #[staticmethod]
    fn intrinsic_rational(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        CoreFunction::intrinsic_rational(num, den).map(Self).map_err(err)
    }

    #[staticmethod]
    fn exp() -> Self {
        Self(CoreFunction::exp())
    }

    /// `(q - alpha)^{-1}`.
    #[staticmethod]
    fn resolvent_shift(alpha: f64) -> Self {
        Self(CoreFunction::resolvent_shift(alpha))
    }

    fn __call__(&self, q: &Bound<'_, PyAny>) -> PyResult<PyQuaternion> {
        self.0.eval(quat(q)?).map(PyQuaternion).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(json_err)
    }
}

fn calc_options(slice: Option<&Bound<'_, PyAny>>, tol: Option<f64>, radius: Option<f64>) -> PyResult<CalcOptions> {
    let mut opts = CalcOptions::default();
    if let Some(u) = slice {
        opts.slice = ImaginaryUnit::new(quat(u)?).map_err(err)?;
    }
    if let Some(tol) = tol {
        opts.quadrature = QuadratureOptions { tol, ..opts.quadrature };
    }
    opts.radius = radius;
    Ok(opts)
}

/// S-spectrum as `{"spheres": [{"x", "y", "mult"}], "norm_bound"}`.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, t: &PyQuatMatrix) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &s_spectrum(&t.0).map_err(err)?)
}

/// Right S-resolvent `-Q_s(T)^{-1} (T - conj(s))`.
#[pyfunction]
fn resolvent(t: &PyQuatMatrix, s: &Bound<'_, PyAny>) -> PyResult<PyQuatMatrix> {
    Ok(PyQuatMatrix(s_resolvent(&t.0, quat(s)?).map_err(err)?.operator))
}

/// Left inverse `S(s, T) = (T - conj(s))^{-1} s (T - conj(s)) - T`.
#[pyfunction]
fn left_inverse(t: &PyQuatMatrix, s: &Bound<'_, PyAny>) -> PyResult<PyQuatMatrix> {
    s_left_inverse(&t.0, quat(s)?).map(PyQuatMatrix).map_err(err)
}

/// `||S^-1(s,T) s - T S^-1(s,T) - I||`.
#[pyfunction]
fn resolvent_residual(t: &PyQuatMatrix, s: &Bound<'_, PyAny>) -> PyResult<f64> {
    resolvent_equation_residual(&t.0, quat(s)?).map_err(err)
}

/// `f(T)` by contour quadrature; returns `(value, error_estimate)`.
#[pyfunction]
#[pyo3(signature = (t, f, *, slice = None, tol = None, radius = None))]
fn calc(
    t: &PyQuatMatrix,
    f: &PySliceFunction,
    slice: Option<&Bound<'_, PyAny>>,
    tol: Option<f64>,
    radius: Option<f64>,
) -> PyResult<(PyQuatMatrix, f64)> {
    let r = f_of_t_auto(&t.0, &f.0, &calc_options(slice, tol, radius)?).map_err(err)?;
    Ok((PyQuatMatrix(r.value), r.quadrature_error_estimate))
}

/// `f(T)` by both unbounded-type routes; returns a dict with `k`,
/// `value`, `direct` and `discrepancy`.
#[pyfunction]
#[pyo3(signature = (t, f, *, k = None, slice = None, tol = None))]
fn calc_unbounded<'py>(
    py: Python<'py>,
    t: &PyQuatMatrix,
    f: &PySliceFunction,
    k: Option<f64>,
    slice: Option<&Bound<'_, PyAny>>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = f_of_t_unbounded_with(&t.0, &f.0, k, &calc_options(slice, tol, None)?).map_err(err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("k", r.k)?;
    d.set_item("value", PyQuatMatrix(r.transform.value))?;
    d.set_item("direct", PyQuatMatrix(r.direct.value))?;
    d.set_item("discrepancy", r.discrepancy)?;
    Ok(d.into_any())
}

/// Seeded identity checks, as the `verify` command reports them.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &run_verify(&VerifyOptions { seed, corrupt_resolvent_sign: false }).map_err(err)?)
}

#[pymodule]
pub fn squatcalc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SquatcalcError", m.py().get_type::<SquatcalcError>())?;
    m.add_class::<PyQuaternion>()?;
    m.add_class::<PyQuatMatrix>()?;
    m.add_class::<PySliceFunction>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(left_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent_residual, m)?)?;
    m.add_function(wrap_pyfunction!(calc, m)?)?;
    m.add_function(wrap_pyfunction!(calc_unbounded, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
