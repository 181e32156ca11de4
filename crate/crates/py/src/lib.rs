//! Python bindings for the qcrit numerical core.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qcrit::error::Error;
use qcrit::{cli, freud, kernels, model, orthopoly, painleve2, psi_cp, semiclassics};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::OutOfRange { .. } | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Quartic potential V(z) = t z²/2 + g z⁴/4 with weight scale N.
#[pyclass(name = "ModelParams", frozen)]
struct PyModelParams {
    inner: model::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (t, g, size))]
    fn new(t: f64, g: f64, size: usize) -> PyResult<Self> {
        Ok(Self {
            inner: model::ModelParams::new(t, g, size).map_err(to_py)?,
        })
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size
    }

    fn potential(&self, z: f64) -> f64 {
        self.inner.potential(z)
    }

    /// Equilibrium density at λ = 1.
    fn density(&self, x: f64) -> f64 {
        self.inner.density(x)
    }

    fn y_of(&self, n: usize) -> PyResult<f64> {
        self.inner.y_of(n).map_err(to_py)
    }

    /// Critical constants t_c, λ_c, z_0, c_0, c_1, c_2, C, c_9.
    fn constants(&self) -> PyResult<BTreeMap<&'static str, f64>> {
        let c = self.inner.derive_constants().map_err(to_py)?;
        Ok(BTreeMap::from([
            ("t_c", c.t_c),
            ("lambda_c", c.lambda_c),
            ("z0", c.z0),
            ("c0", c.c0),
            ("c1", c.c1),
            ("c2", c.c2),
            ("big_c", c.big_c),
            ("c9", c.c9),
        ]))
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(t={}, g={}, size={})",
            self.inner.t, self.inner.g, self.inner.size
        )
    }
}

/// R_0..R_{n_max} from the string equation ("variational", "forward") or quadrature ("oracle").
#[pyfunction]
#[pyo3(signature = (params, n_max, method = "variational", tol = 1e-13))]
fn recurrence(params: &PyModelParams, n_max: usize, method: &str, tol: f64) -> PyResult<Vec<f64>> {
    let p = &params.inner;
    let t = match method {
        "variational" => freud::solve(p, n_max, tol),
        "forward" => freud::forward_recursion(p, n_max),
        "oracle" => freud::quadrature_oracle(p, n_max, tol),
        _ => return Err(PyValueError::new_err(format!("unknown method {method}"))),
    }
    .map_err(to_py)?;
    Ok(t.r)
}

/// Double-scaling approximation R_n⁰.
#[pyfunction]
fn ansatz_r(params: &PyModelParams, n: usize) -> PyResult<f64> {
    freud::ansatz_r(&params.inner, n, painleve2::default_grid()).map_err(to_py)
}

/// Orthonormal ψ-functions and the Christoffel–Darboux kernel.
#[pyclass(name = "PsiEvaluator", frozen)]
struct PyPsiEvaluator {
    inner: orthopoly::PsiEvaluator,
}

#[pymethods]
impl PyPsiEvaluator {
    #[new]
    #[pyo3(signature = (params, n_max, tol = 1e-13))]
    fn new(params: &PyModelParams, n_max: usize, tol: f64) -> PyResult<Self> {
        Ok(Self {
            inner: orthopoly::oracle(&params.inner, n_max, tol).map_err(to_py)?,
        })
    }

    #[getter]
    fn r(&self) -> Vec<f64> {
        self.inner.recurrence.r.clone()
    }

    #[getter]
    fn log_h(&self) -> Vec<f64> {
        self.inner.recurrence.log_h.clone()
    }

    fn psi(&self, n: usize, x: f64) -> PyResult<f64> {
        self.inner.psi_real(n, x).map_err(to_py)
    }

    fn psi_all(&self, n: usize, x: f64) -> PyResult<Vec<f64>> {
        self.inner.all_real(n, x).map_err(to_py)
    }

    fn kernel(&self, level: usize, z: f64, w: f64) -> PyResult<f64> {
        self.inner.cd_kernel(level, z, w).map_err(to_py)
    }

    fn correlation(&self, level: usize, points: Vec<f64>) -> PyResult<f64> {
        self.inner.correlation(level, &points).map_err(to_py)
    }

    /// Q_N(z, z)/N with N the weight scale.
    fn density(&self, z: f64) -> PyResult<f64> {
        kernels::density_from_kernel(&self.inner, z).map_err(to_py)
    }
}

/// Hastings–McLeod solution on a uniform grid.
#[pyclass(name = "HastingsMcLeod", frozen)]
struct PyHM {
    inner: painleve2::HMGrid,
}

#[pymethods]
impl PyHM {
    #[new]
    #[pyo3(signature = (y_min = -16.0, y_max = 10.0, mesh = 5200, tol = 1e-13))]
    fn new(y_min: f64, y_max: f64, mesh: usize, tol: f64) -> PyResult<Self> {
        Ok(Self {
            inner: painleve2::solve_hastings_mcleod(y_min, y_max, mesh, tol).map_err(to_py)?,
        })
    }

    fn u(&self, y: f64) -> PyResult<f64> {
        self.inner.u_at(y).map_err(to_py)
    }

    /// (u, u', v, D, q) at y.
    fn at(&self, y: f64) -> PyResult<(f64, f64, f64, f64, f64)> {
        let p = self.inner.at(y).map_err(to_py)?;
        Ok((p.u, p.up, p.v, p.d, p.q))
    }

    fn residual(&self) -> f64 {
        self.inner.painleve_residual()
    }

    fn y0(&self) -> PyResult<f64> {
        self.inner.find_y0().map_err(to_py)
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.clone()
    }
}

/// Solution Φ of the critical-point system at y.
#[pyclass(name = "PhiSolution", frozen)]
struct PyPhi {
    inner: psi_cp::PhiSolution,
}

#[pymethods]
impl PyPhi {
    #[new]
    #[pyo3(signature = (y, parity = 0, z_far = 12.0))]
    fn new(y: f64, parity: u8, z_far: f64) -> PyResult<Self> {
        let opts = psi_cp::PhiOptions {
            z_far,
            ..Default::default()
        };
        Ok(Self {
            inner: psi_cp::solve_phi(painleve2::default_grid(), y, parity, opts).map_err(to_py)?,
        })
    }

    fn eval(&self, z: f64) -> PyResult<(f64, f64)> {
        let v = self.inner.eval(z).map_err(to_py)?;
        Ok((v[0], v[1]))
    }

    fn kernel(&self, u: f64, v: f64) -> PyResult<f64> {
        psi_cp::critical_kernel(&self.inner, u, v).map_err(to_py)
    }

    #[getter]
    fn parity_defect(&self) -> f64 {
        self.inner.parity_defect
    }
}

#[pyfunction]
fn sine_kernel(u: f64, v: f64) -> f64 {
    kernels::sine_kernel(u, v)
}

#[pyfunction]
fn airy_kernel(u: f64, v: f64) -> f64 {
    kernels::airy_kernel(u, v)
}

/// Sup error of the rescaled Q_N against its limit kernel at t = t_c + c_0yN^{-2/3}.
#[pyfunction]
#[pyo3(signature = (regime, size, y = 0.0, g = 1.0, center = None, offsets = None))]
fn scaling_limit_check(
    regime: &str,
    size: usize,
    y: f64,
    g: f64,
    center: Option<f64>,
    offsets: Option<Vec<f64>>,
) -> PyResult<BTreeMap<&'static str, f64>> {
    let regime = kernels::ScalingRegime::parse(regime).map_err(to_py)?;
    let mut opts = kernels::ScalingOptions {
        center,
        ..Default::default()
    };
    if let Some(o) = offsets {
        opts.offsets = o;
    }
    let r = kernels::scaling_limit_check(regime, g, size, y, &opts, painleve2::default_grid()).map_err(to_py)?;
    Ok(BTreeMap::from([
        ("sup_error", r.sup_error),
        ("center", r.center),
        ("scale", r.scale),
        ("t", r.t),
    ]))
}

/// Rows (N, n, region, sup_error) and fitted rates of the asymptotic approximants.
#[pyfunction]
#[pyo3(signature = (params, sizes, regions = None, k = 0))]
#[allow(clippy::type_complexity)]
fn compare(
    params: &PyModelParams,
    sizes: Vec<usize>,
    regions: Option<Vec<String>>,
    k: i64,
) -> PyResult<(Vec<(usize, usize, &'static str, f64)>, BTreeMap<&'static str, f64>)> {
    let regions: Vec<semiclassics::Region> = match regions {
        None => semiclassics::Region::ALL.to_vec(),
        Some(v) => v
            .iter()
            .map(|s| semiclassics::Region::parse(s))
            .collect::<Result<_, _>>()
            .map_err(to_py)?,
    };
    let rep = semiclassics::compare_harness(
        &params.inner,
        &sizes,
        k,
        &regions,
        &semiclassics::CompareOptions::default(),
        painleve2::default_grid(),
    )
    .map_err(to_py)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| (r.size, r.n, r.region.name(), r.sup_error))
        .collect();
    let rates = rep.rates.iter().map(|(r, v)| (r.name(), *v)).collect();
    Ok((rows, rates))
}

/// Run the invariant suite; returns (passed, report text).
#[pyfunction]
fn selftest() -> (bool, String) {
    let r = cli::selftest(cli::SelftestHooks::default());
    (r.passed(), r.to_text())
}

#[pymodule]
fn qcrit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cli::VERSION)?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyPsiEvaluator>()?;
    m.add_class::<PyHM>()?;
    m.add_class::<PyPhi>()?;
    m.add_function(wrap_pyfunction!(recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(ansatz_r, m)?)?;
    m.add_function(wrap_pyfunction!(sine_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(airy_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_limit_check, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
