//! Python bindings: convex bodies, prior families, the closed-form bounds,
//! Monte Carlo tail estimates, sphere nets and the finite-space oracle.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use subconc_core::bounds::{self as b, BoundInput};
use subconc_core::montecarlo::{self as mc, McOptions};
use subconc_core::{oracle, sphere_nets};

fn err(e: subconc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "ConvexBody", module = "subconc", frozen, from_py_object)]
#[derive(Clone)]
struct PyConvexBody(subconc_core::ConvexBody);

#[pymethods]
impl PyConvexBody {
    #[staticmethod]
    fn interval(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        subconc_core::ConvexBody::interval(lo, hi).map(Self).map_err(err)
    }

    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        subconc_core::ConvexBody::ball(center, radius).map(Self).map_err(err)
    }

    #[staticmethod]
    fn polytope(vertices: Vec<Vec<f64>>) -> PyResult<Self> {
        subconc_core::ConvexBody::polytope(vertices).map(Self).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.shape().kind_name()
    }

    fn support_function(&self, p: Vec<f64>) -> PyResult<f64> {
        self.0.support_function(&p).map_err(err)
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.project(&x).map_err(err)
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.distance_to(&x).map_err(err)
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        self.0.contains(&x, tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ConvexBody({}, dim={})", self.0.shape().kind_name(), self.0.dim())
    }
}

#[pyfunction]
fn minkowski_average(bodies: Vec<PyConvexBody>) -> PyResult<PyConvexBody> {
    let bodies: Vec<_> = bodies.into_iter().map(|b| b.0).collect();
    subconc_core::minkowski_average(&bodies).map(PyConvexBody).map_err(err)
}

#[pyclass(name = "PriorFamily", module = "subconc", frozen)]
struct PyPriorFamily(subconc_core::PriorFamily);

#[pymethods]
impl PyPriorFamily {
    /// Coordinate `i` is uniform on `[μᵢ − r, μᵢ + r]` with `μᵢ ∈ [−a, a]`.
    #[staticmethod]
    fn uniform_shift(a: f64, r: f64, n: usize) -> PyResult<Self> {
        subconc_core::PriorFamily::uniform_shift(a, r, n).map(Self).map_err(err)
    }

    /// Coordinate `i` is `μᵢ` plus a uniform draw from the radius-`r` ball,
    /// with `μ₁ ∈ theta1` and `μᵢ ∈ [−a, a]^d` afterwards.
    #[staticmethod]
    fn ball_shift(a: f64, r: f64, n: usize, theta1: PyConvexBody) -> PyResult<Self> {
        subconc_core::PriorFamily::ball_shift(a, r, n, theta1.0).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn m_bound(&self) -> f64 {
        self.0.m_bound()
    }

    fn theta(&self) -> PyResult<PyConvexBody> {
        self.0.theta().map(PyConvexBody).map_err(err)
    }

    fn sigma_bar_sq(&self) -> PyResult<f64> {
        self.0.sigma_bar_sq().map_err(err)
    }

    /// Draws one sample under the prior whose means are all `mu`.
    fn sample_constant(&self, mu: Vec<f64>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let prior = subconc_core::PriorPoint::constant(mu, self.0.n());
        self.0.sample(&prior, seed).map_err(err)
    }
}

fn bound_dict<'py>(py: Python<'py>, v: b::BoundValue) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("raw", v.raw)?;
    d.set_item("clamped", v.clamped)?;
    d.set_item("exponent", v.exponent)?;
    d.set_item("prefactor", v.prefactor)?;
    d.set_item("log10", v.log10)?;
    d.set_item("vacuous", v.vacuous)?;
    Ok(d)
}

macro_rules! bound_fn {
    ($name:ident, $core:path) => {
        #[pyfunction]
        fn $name<'py>(py: Python<'py>, n: u64, d: usize, m: f64, sigma_sq: f64, t: f64) -> PyResult<Bound<'py, PyDict>> {
            let input = BoundInput::new(n, d, m, sigma_sq, t).map_err(err)?;
            bound_dict(py, $core(&input).map_err(err)?)
        }
    };
}

bound_fn!(azuma_bound, b::azuma_bound);
bound_fn!(bernstein_bound, b::bernstein_bound);
bound_fn!(dimfree_bound, b::dimfree_bound);

#[pyfunction]
fn regime(m: f64, sigma_sq: f64, t: f64) -> &'static str {
    match b::regime_classify(m, sigma_sq, t) {
        b::Regime::SubGaussian => "sub_gaussian",
        b::Regime::SubExponential => "sub_exponential",
    }
}

#[pyfunction]
fn moment_bound(n: u64, d: usize, m: f64, sigma_sq: f64) -> PyResult<f64> {
    b::moment_bound(n, d, m, sigma_sq).map_err(err)
}

#[pyfunction]
fn rate_function(x: f64, r: f64) -> PyResult<f64> {
    b::rate_function(x, r).map_err(err)
}

#[pyfunction]
fn sharpness_lower_bound(n: u64, sigma: f64, t: f64) -> PyResult<(f64, bool)> {
    let s = b::sharpness_lower_bound(n, sigma, t).map_err(err)?;
    Ok((s.value, s.valid))
}

#[pyfunction]
#[pyo3(signature = (k, n, level = mc::CI_LEVEL))]
fn clopper_pearson(k: u64, n: u64, level: f64) -> PyResult<(f64, f64)> {
    if k > n || n == 0 || !(level > 0.0 && level < 1.0) {
        return Err(PyValueError::new_err("need 0 <= k <= n, n >= 1 and 0 < level < 1"));
    }
    Ok(mc::clopper_pearson(k, n, level))
}

/// Sandwich sweep: Monte Carlo upper-capacity estimates of
/// `P(ρ_Θ(S_n/n) > t)` with the closed-form bounds alongside.
#[pyfunction]
#[pyo3(signature = (family, t_grid, replicates, seed, random_priors = 0, workers = None))]
fn sandwich<'py>(
    py: Python<'py>,
    family: &PyPriorFamily,
    t_grid: Vec<f64>,
    replicates: u64,
    seed: u64,
    random_priors: usize,
    workers: Option<usize>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut opts = McOptions::new(replicates, seed);
    opts.workers = workers;
    let fam = &family.0;
    let rows = py
        .detach(|| mc::sandwich_sweep(fam, fam.n(), &t_grid, random_priors, &opts))
        .map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("t", r.t)?;
            d.set_item("point", r.mc.point)?;
            d.set_item("ci_lo", r.mc.ci_lo)?;
            d.set_item("ci_hi", r.mc.ci_hi)?;
            d.set_item("exceedances", r.mc.exceedances)?;
            d.set_item("azuma", r.azuma.clamped)?;
            d.set_item("bernstein", r.bernstein.clamped)?;
            d.set_item("dimfree", r.dimfree.clamped)?;
            d.set_item("lower", r.lower.filter(|l| l.valid).map(|l| l.value))?;
            d.set_item("upper_holds", r.upper_holds())?;
            d.set_item("lower_holds", r.lower_holds())?;
            Ok(d)
        })
        .collect()
}

/// Greedy 1/2-net of the unit sphere in `R^d`, as a list of points.
#[pyfunction]
#[pyo3(signature = (d, seed = sphere_nets::DEFAULT_NET_SEED))]
fn half_net(py: Python<'_>, d: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    py.detach(|| sphere_nets::build_half_net_seeded(d, seed))
        .map(|n| n.points)
        .map_err(err)
}

#[pyfunction]
fn reference_spaces() -> Vec<String> {
    oracle::reference_spaces().iter().map(|s| s.name().to_string()).collect()
}

/// Runs the exact check suite on a shipped finite space. Returns
/// `(verdict_ok, max discrepancy per check)`.
#[pyfunction]
#[pyo3(signature = (name, probes = 64, seed = 0))]
fn oracle_suite<'py>(py: Python<'py>, name: &str, probes: usize, seed: u64) -> PyResult<(bool, Bound<'py, PyDict>)> {
    let space = oracle::reference_spaces()
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("no shipped space `{name}`")))?;
    let r = space.run_suite(probes, seed).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("independence", r.independence.max_discrepancy)?;
    d.set_item("theta", r.theta.iter().map(|c| c.max_discrepancy).fold(0.0, f64::max))?;
    d.set_item("domination", r.domination.max_discrepancy)?;
    d.set_item("moment_lhs", r.moment.lhs)?;
    d.set_item("moment_rhs", r.moment.rhs)?;
    d.set_item("independent", r.independence.passed)?;
    Ok((r.verdict_ok, d))
}

#[pymodule]
fn subconc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConvexBody>()?;
    m.add_class::<PyPriorFamily>()?;
    m.add_function(wrap_pyfunction!(minkowski_average, m)?)?;
    m.add_function(wrap_pyfunction!(azuma_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bernstein_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dimfree_bound, m)?)?;
    m.add_function(wrap_pyfunction!(regime, m)?)?;
    m.add_function(wrap_pyfunction!(moment_bound, m)?)?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(clopper_pearson, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich, m)?)?;
    m.add_function(wrap_pyfunction!(half_net, m)?)?;
    m.add_function(wrap_pyfunction!(reference_spaces, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_suite, m)?)?;
    Ok(())
}
