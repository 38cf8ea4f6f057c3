//! Python bindings.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ultrafrac::config::RunConfig;
use ultrafrac::geometry::{cone_level_set as cone, drift_field, exponential_map, MediumConfig, Signature, WeightField};
use ultrafrac::grid::GridSpec;
use ultrafrac::solution::{oracle_propagator_many, PropagatorSample};
use ultrafrac::timefrac::HilferOrder;
use ultrafrac::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A medium: signature, orders, deformation map and weight.
#[pyclass(module = "ultrafrac", frozen)]
struct Medium {
    inner: MediumConfig,
}

#[pymethods]
impl Medium {
    #[new]
    #[pyo3(signature = (p, q, beta, mu, nu = 1.0, c = 1.0))]
    fn new(p: usize, q: usize, beta: f64, mu: f64, nu: f64, c: f64) -> PyResult<Self> {
        let sig = Signature::new(p, q).map_err(to_py)?;
        let order = HilferOrder::new(mu, nu).map_err(to_py)?;
        let inner = MediumConfig::flat(sig, c, beta, order).map_err(to_py)?;
        Ok(Medium { inner })
    }

    /// Parse the TOML run-configuration format used by the command line.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Medium {
            inner: RunConfig::from_toml(text).map_err(to_py)?.medium,
        })
    }

    /// Same medium deformed by `phi_i(x) = (exp(lambda_i x_i) - 1) / lambda_i`.
    /// With `jacobian_weight` the weight becomes `det Dphi`.
    #[pyo3(signature = (lambdas, jacobian_weight = true))]
    fn with_exponential_map(&self, lambdas: Vec<f64>, jacobian_weight: bool) -> PyResult<Self> {
        let map = exponential_map(lambdas);
        let mut inner = self.inner.clone().with_map(map.clone()).map_err(to_py)?;
        if jacobian_weight {
            inner = inner.with_weight(WeightField::jacobian_of(&map));
        }
        Ok(Medium { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!(
            "Medium(dim={}, map={}, weight={})",
            self.inner.dim(),
            self.inner.map.label(),
            self.inner.weight.label()
        )
    }
}

/// One evaluation of the fundamental solution.
#[pyclass(module = "ultrafrac", frozen, get_all)]
struct Sample {
    x: Vec<f64>,
    t: f64,
    p_value: f64,
    value: Complex64,
    argument: Complex64,
    h_value: Complex64,
    method: String,
    error: f64,
}

impl From<PropagatorSample> for Sample {
    fn from(s: PropagatorSample) -> Self {
        Sample {
            x: s.x,
            t: s.t,
            p_value: s.p_value,
            value: s.value,
            argument: s.argument,
            h_value: s.h_value,
            method: s.method.to_string(),
            error: s.error,
        }
    }
}

#[pymethods]
impl Sample {
    fn __repr__(&self) -> String {
        format!("Sample(value={}, method={}, error={:e})", self.value, self.method, self.error)
    }
}

/// Fundamental solution of a fixed medium.
#[pyclass(module = "ultrafrac", frozen)]
struct Propagator {
    inner: ultrafrac::solution::Propagator,
}

#[pymethods]
impl Propagator {
    #[new]
    fn new(medium: &Medium) -> PyResult<Self> {
        Ok(Propagator {
            inner: ultrafrac::solution::Propagator::new(&medium.inner).map_err(to_py)?,
        })
    }

    #[getter]
    fn a_star(&self) -> f64 {
        self.inner.a_star()
    }

    #[getter]
    fn mu_star(&self) -> f64 {
        self.inner.mu_star()
    }

    fn sample(&self, x: Vec<f64>, t: f64) -> PyResult<Sample> {
        self.inner.sample(&x, t).map(Sample::from).map_err(to_py)
    }

    /// Residue series against the contour integral.
    /// Returns `(max_relative_difference, passed)`.
    fn overlap_check(&self) -> PyResult<(f64, bool)> {
        let r = ultrafrac::solution::overlap_check(self.inner.spec(), self.inner.plan()).map_err(to_py)?;
        Ok((r.max_relative, r.passed()))
    }
}

/// `E_{mu,nu}(z)`.
#[pyfunction]
fn mittag_leffler(mu: f64, nu: f64, z: Complex64) -> PyResult<Complex64> {
    ultrafrac::specfun::mittag_leffler::mittag_leffler(mu, nu, z).map_err(to_py)
}

/// Drift vector of the weighted operator at `x`.
#[pyfunction]
fn drift(medium: &Medium, x: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(drift_field(&medium.inner, &x).map_err(to_py)?.as_slice().to_vec())
}

/// Polylines of `P(phi(x)) = level` on a square grid.
#[pyfunction]
#[pyo3(signature = (medium, lo, hi, samples, level = 0.0))]
fn cone_level_set(medium: &Medium, lo: f64, hi: f64, samples: usize, level: f64) -> PyResult<Vec<Vec<[f64; 2]>>> {
    let grid = GridSpec::square(lo, hi, samples).map_err(to_py)?;
    cone(&medium.inner, &grid, level).map_err(to_py)
}

/// Propagator by direct inversion of the frequency solution, 1-D only.
#[pyfunction]
#[pyo3(signature = (medium, xs, t, xi_max = 100.0, samples = 4001))]
fn oracle(medium: &Medium, xs: Vec<f64>, t: f64, xi_max: f64, samples: usize) -> PyResult<Vec<Complex64>> {
    let grid = GridSpec::line(-xi_max, xi_max, samples).map_err(to_py)?;
    oracle_propagator_many(&medium.inner, &grid, &xs, t).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "ultrafrac")]
fn ultrafrac_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Medium>()?;
    m.add_class::<Propagator>()?;
    m.add_class::<Sample>()?;
    m.add_function(wrap_pyfunction!(mittag_leffler, m)?)?;
    m.add_function(wrap_pyfunction!(drift, m)?)?;
    m.add_function(wrap_pyfunction!(cone_level_set, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    Ok(())
}
