//! Python bindings: kernel parameters, the three operators, the closed-form
//! bounds and the convergence sweep.

use std::sync::{Arc, Mutex};

use actconv::analysis::{kernel_abs_moment, kernel_mass, kernel_tail_mass};
use actconv::function::{by_name, CATALOG_NAMES};
use actconv::{
    apply_on_grid, central_moment, central_moment_bound, estimate_modulus, fit_rate, jackson_bound,
    run_convergence_sweep, taylor_bound, Error, KernelParams, KindTag, MeasurementGrid, OperatorKind,
    OperatorSpec, QuadratureConfig, TestFunction,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_)
        | Error::Domain(_)
        | Error::Precondition { .. }
        | Error::Config(_)
        | Error::MissingDerivative { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn kind_tag(kind: &str) -> PyResult<KindTag> {
    match kind {
        "basic" => Ok(KindTag::Basic),
        "kantorovich" => Ok(KindTag::Kantorovich),
        "quadrature" => Ok(KindTag::Quadrature),
        other => Err(PyValueError::new_err(format!("unknown operator kind `{other}`"))),
    }
}

fn quad(tol: f64) -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: tol,
        rel_tol: tol,
        ..QuadratureConfig::default()
    }
}

type Failure = Arc<Mutex<Option<PyErr>>>;

/// A catalog name, or a Python callable together with its sup norm.
/// Exceptions raised by the callable are parked in the returned slot.
fn resolve_function(f: &Bound<'_, PyAny>, sup_norm: Option<f64>, half_width: f64) -> PyResult<(TestFunction, Failure)> {
    let failure: Failure = Arc::new(Mutex::new(None));
    if let Ok(name) = f.extract::<String>() {
        return Ok((by_name(&name, half_width).map_err(to_py)?, failure));
    }
    if !f.is_callable() {
        return Err(PyValueError::new_err("expected a catalog name or a callable"));
    }
    let bound = sup_norm.ok_or_else(|| PyValueError::new_err("a callable needs sup_norm"))?;
    let callable: Py<PyAny> = f.clone().unbind();
    let slot = Arc::clone(&failure);
    let func = TestFunction::new("python", bound, move |x| {
        Python::attach(|py| match callable.call1(py, (x,)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                slot.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        })
    });
    Ok((func, failure))
}

fn raise_parked(failure: &Failure) -> PyResult<()> {
    match failure.lock().unwrap().take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Kernel parameters `q > 0`, `β > 0`.
#[pyclass(name = "KernelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyKernelParams {
    inner: KernelParams,
}

#[pymethods]
impl PyKernelParams {
    #[new]
    #[pyo3(signature = (q = 1.0, beta = 1.0))]
    fn new(q: f64, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: KernelParams::new(q, beta).map_err(to_py)?,
        })
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn nu(&self, x: f64) -> PyResult<f64> {
        self.inner.nu(x).map_err(to_py)
    }

    fn g(&self, x: f64) -> PyResult<f64> {
        self.inner.g(x).map_err(to_py)
    }

    fn psi(&self, x: f64) -> PyResult<f64> {
        self.inner.psi(x).map_err(to_py)
    }

    fn g_max(&self) -> (f64, f64) {
        (self.inner.g_argmax(), self.inner.g_max_value())
    }

    #[pyo3(signature = (n, alpha = 0.5))]
    fn tail_mass_bound(&self, n: u32, alpha: f64) -> PyResult<f64> {
        self.inner.tail_mass_bound(n, alpha).map_err(to_py)
    }

    fn moment_bound(&self, k: u32) -> PyResult<f64> {
        self.inner.moment_bound(k).map_err(to_py)
    }

    #[pyo3(signature = (tol = 1e-10))]
    fn mass(&self, tol: f64) -> PyResult<f64> {
        Ok(kernel_mass(&self.inner, &quad(tol)).map_err(to_py)?.value)
    }

    #[pyo3(signature = (window, tol = 1e-10))]
    fn tail_mass(&self, window: f64, tol: f64) -> PyResult<f64> {
        Ok(kernel_tail_mass(&self.inner, window, &quad(tol)).map_err(to_py)?.value)
    }

    #[pyo3(signature = (k, tol = 1e-10))]
    fn abs_moment(&self, k: u32, tol: f64) -> PyResult<f64> {
        Ok(kernel_abs_moment(&self.inner, k, &quad(tol)).map_err(to_py)?.value)
    }

    fn __repr__(&self) -> String {
        format!("KernelParams(q={}, beta={})", self.inner.q(), self.inner.beta())
    }
}

/// One of the three operators at a fixed `n`.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    spec: OperatorSpec,
    quad: QuadratureConfig,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (kind, n, params = None, alpha = 0.5, weights = None, tol = 1e-10))]
    fn new(
        kind: &str,
        n: u32,
        params: Option<PyKernelParams>,
        alpha: f64,
        weights: Option<Vec<f64>>,
        tol: f64,
    ) -> PyResult<Self> {
        let kind = match (kind_tag(kind)?, weights) {
            (KindTag::Basic, None) => OperatorKind::Basic,
            (KindTag::Kantorovich, None) => OperatorKind::Kantorovich,
            (KindTag::Quadrature, Some(w)) => OperatorKind::quadrature(w).map_err(to_py)?,
            (KindTag::Quadrature, None) => OperatorKind::uniform_quadrature(4).map_err(to_py)?,
            (_, Some(_)) => return Err(PyValueError::new_err("weights only apply to the quadrature kind")),
        };
        let params = params.map_or_else(|| KernelParams::new(1.0, 1.0).map_err(to_py), |p| Ok(p.inner))?;
        let quad = quad(tol);
        quad.validate().map_err(to_py)?;
        Ok(Self {
            spec: OperatorSpec::new(kind, n, params, alpha).map_err(to_py)?,
            quad,
        })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind.name()
    }

    #[getter]
    fn n(&self) -> u32 {
        self.spec.n
    }

    /// Operator output at each point. `f` is a catalog name or a callable;
    /// callables need `sup_norm`.
    #[pyo3(signature = (f, xs, sup_norm = None, half_width = 3.0))]
    fn __call__(
        &self,
        py: Python<'_>,
        f: &Bound<'_, PyAny>,
        xs: Vec<f64>,
        sup_norm: Option<f64>,
        half_width: f64,
    ) -> PyResult<Vec<f64>> {
        let (func, failure) = resolve_function(f, sup_norm, half_width)?;
        let out = py.detach(|| apply_on_grid(&func, &self.spec, &xs, &self.quad));
        raise_parked(&failure)?;
        out.map_err(to_py)
    }

    fn central_moment(&self, x: f64, k: u32) -> PyResult<f64> {
        central_moment(&self.spec, x, k, &self.quad).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Operator(kind={:?}, n={})", self.spec.kind.name(), self.spec.n)
    }
}

#[pyfunction]
#[pyo3(signature = (kind, omega, n, params = None, alpha = 0.5, sup_norm = 1.0))]
fn jackson(kind: &str, omega: f64, n: u32, params: Option<PyKernelParams>, alpha: f64, sup_norm: f64) -> PyResult<f64> {
    let params = params.map_or_else(|| KernelParams::new(1.0, 1.0).map_err(to_py), |p| Ok(p.inner))?;
    Ok(jackson_bound(kind_tag(kind)?, omega, &params, n, alpha, sup_norm).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (kind, omega, n, order, params = None, alpha = 0.5, sup_norm = 1.0))]
fn taylor(
    kind: &str,
    omega: f64,
    n: u32,
    order: u32,
    params: Option<PyKernelParams>,
    alpha: f64,
    sup_norm: f64,
) -> PyResult<f64> {
    let params = params.map_or_else(|| KernelParams::new(1.0, 1.0).map_err(to_py), |p| Ok(p.inner))?;
    Ok(taylor_bound(kind_tag(kind)?, omega, &params, n, alpha, order, sup_norm).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (kind, k, n, params = None))]
fn moment(kind: &str, k: u32, n: u32, params: Option<PyKernelParams>) -> PyResult<f64> {
    let params = params.map_or_else(|| KernelParams::new(1.0, 1.0).map_err(to_py), |p| Ok(p.inner))?;
    central_moment_bound(kind_tag(kind)?, k, &params, n).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (name, theta, domain = (-3.0, 3.0), points = 2001))]
fn modulus(name: &str, theta: f64, domain: (f64, f64), points: usize) -> PyResult<f64> {
    let f = by_name(name, domain.1.abs().max(domain.0.abs())).map_err(to_py)?;
    let grid = MeasurementGrid::uniform(domain.0, domain.1, points).map_err(to_py)?;
    estimate_modulus(&f, theta, &grid).map_err(to_py)
}

/// Sup error against the Jackson-type bound for each `n`, as a list of dicts,
/// plus the fitted log-log slope (`None` when fewer than three errors).
#[pyfunction]
#[pyo3(signature = (name, kind, ns, params = None, alpha = 0.5, domain = (-3.0, 3.0), points = 2001, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    name: &str,
    kind: &str,
    ns: Vec<u32>,
    params: Option<PyKernelParams>,
    alpha: f64,
    domain: (f64, f64),
    points: usize,
    tol: f64,
) -> PyResult<(Vec<Bound<'py, PyDict>>, Option<f64>)> {
    let params = params.map_or_else(|| KernelParams::new(1.0, 1.0).map_err(to_py), |p| Ok(p.inner))?;
    let kind = match kind_tag(kind)? {
        KindTag::Basic => OperatorKind::Basic,
        KindTag::Kantorovich => OperatorKind::Kantorovich,
        KindTag::Quadrature => OperatorKind::uniform_quadrature(4).map_err(to_py)?,
    };
    let f = by_name(name, domain.1.abs().max(domain.0.abs())).map_err(to_py)?;
    let grid = MeasurementGrid::uniform(domain.0, domain.1, points).map_err(to_py)?;
    let quad = quad(tol);
    let records = py.detach(|| run_convergence_sweep(&f, &kind, &ns, alpha, params, &grid, &quad));
    let rate = fit_rate(&records).ok();
    let rows = records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("sup_error", r.measured_sup_error)?;
            d.set_item("bound", r.bound_value)?;
            d.set_item("hypothesis_met", r.hypothesis_met)?;
            d.set_item("satisfied", r.satisfied)?;
            d.set_item("error", r.error.clone())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((rows, rate))
}

#[pyfunction]
fn catalog() -> Vec<&'static str> {
    CATALOG_NAMES.to_vec()
}

#[pymodule(name = "actconv")]
fn actconv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernelParams>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(jackson, m)?)?;
    m.add_function(wrap_pyfunction!(taylor, m)?)?;
    m.add_function(wrap_pyfunction!(moment, m)?)?;
    m.add_function(wrap_pyfunction!(modulus, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
