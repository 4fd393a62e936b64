//! Python bindings: the coloring model, bound functionals, distance
//! estimators, and the Stein-equation checks.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stein_decomp::bound;
use stein_decomp::decomposition::StructureParams;
use stein_decomp::distance::{self, SetFamily};
use stein_decomp::geometry::ConvexSet;
use stein_decomp::graphmodel::{ColoringModel as CoreModel, RegularGraph};
use stein_decomp::steincheck;

fn err(e: stein_decomp::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Monochromatic edge counts of a randomly colored circulant graph.
#[pyclass]
struct ColoringModel {
    inner: CoreModel,
}

#[pymethods]
impl ColoringModel {
    #[new]
    fn new(n: usize, m: usize, pi: Vec<f64>) -> PyResult<Self> {
        let graph = RegularGraph::circulant(n, m).map_err(err)?;
        Ok(ColoringModel {
            inner: CoreModel::new(graph, pi).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_edge_list(text: &str, pi: Vec<f64>) -> PyResult<Self> {
        let graph = RegularGraph::from_edge_list(text).map_err(err)?;
        Ok(ColoringModel {
            inner: CoreModel::new(graph, pi).map_err(err)?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n_edges(&self) -> usize {
        self.inner.graph.n_edges()
    }

    fn mean_vector(&self) -> Vec<f64> {
        self.inner.mean_vector()
    }

    fn covariance(&self) -> Vec<Vec<f64>> {
        let sigma = self.inner.covariance_matrix();
        let d = self.inner.d();
        (0..d)
            .map(|i| (0..d).map(|j| sigma.get(i, j)).collect())
            .collect()
    }

    /// Exact (mean, covariance) by enumeration; fails above the budget.
    fn exact_moments(&self) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let (mean, sigma) = self.inner.exact_moments().map_err(err)?;
        let d = self.inner.d();
        let cov = (0..d)
            .map(|i| (0..d).map(|j| sigma.get(i, j)).collect())
            .collect();
        Ok((mean, cov))
    }

    /// Rows of Sigma^{-1/2}(W - lambda); deterministic in (seed,) only.
    fn sample_standardized(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        self.inner.sample_standardized(count, seed).map_err(err)
    }

    /// (n1, n2, n3, beta) of the edge dependency structure.
    fn structure_params(&self) -> PyResult<(usize, usize, usize, f64)> {
        let p: StructureParams = self
            .inner
            .dependency_model()
            .map_err(err)?
            .structure_params()
            .map_err(err)?;
        Ok((p.n1, p.n2, p.n3, p.beta))
    }

    fn xi_envelope(&self) -> PyResult<f64> {
        self.inner.xi_envelope().map_err(err)
    }
}

/// C d^{1/4} n beta^3 n1 (n2 + n3/d).
#[pyfunction]
fn theorem1_functional(
    d: usize,
    n: usize,
    n1: usize,
    n2: usize,
    n3: usize,
    beta: f64,
    c: f64,
) -> PyResult<f64> {
    let params = StructureParams { n1, n2, n3, beta };
    let inputs = bound::BoundInputs::new(d, n, params, c).map_err(err)?;
    Ok(bound::theorem1_functional(&inputs))
}

/// (L, C d^{7/4} m^{3/2} L^3 n^{-1/2}) for the coloring model.
#[pyfunction]
fn proposition1_bound(
    n: usize,
    m: usize,
    d: usize,
    pi: Vec<f64>,
    c: f64,
) -> PyResult<(f64, f64)> {
    bound::proposition1_bound(n, m, d, &pi, c).map_err(err)
}

/// Exact Kolmogorov distance of a weighted discrete law to N(0,1).
#[pyfunction]
fn kolmogorov_1d(points: Vec<f64>, weights: Vec<f64>) -> PyResult<f64> {
    distance::kolmogorov_1d(&points, &weights).map_err(err)
}

/// Convex-set distance lower bound over the default family.
/// Returns (estimate, ci, lower, argmax_index).
#[pyfunction]
fn estimate_dc(
    samples: Vec<Vec<f64>>,
    dim: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64, usize)> {
    let family = SetFamily::default_family(dim, seed).map_err(err)?;
    let est = distance::estimate_dc(&samples, &family).map_err(err)?;
    Ok((est.estimate, est.ci, est.lower, est.argmax))
}

/// Stein residual for a half-line (-inf, a] in d = 1.
#[pyfunction]
fn stein_residual_halfline(a: f64, eps: f64, w: f64) -> PyResult<f64> {
    let set = ConvexSet::half_space(vec![1.0], a).map_err(err)?;
    steincheck::stein_residual(&set, eps, &[w]).map_err(err)
}

/// Stein residual for a centered ball of radius r in d = 2.
#[pyfunction]
fn stein_residual_ball(r: f64, eps: f64, w: Vec<f64>) -> PyResult<f64> {
    let set = ConvexSet::ball(vec![0.0, 0.0], r).map_err(err)?;
    steincheck::stein_residual(&set, eps, &w).map_err(err)
}

/// Hermite-combination inequality check; returns (lhs, rhs, se, pass).
#[pyfunction]
fn lemma5_check(
    a: Vec<f64>,
    k: usize,
    d: usize,
    samples: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64, bool)> {
    let out = steincheck::lemma5_check(&a, k, d, samples, seed).map_err(err)?;
    Ok((out.lhs, out.rhs, out.se, out.pass))
}

/// The piecewise-quadratic smoothing profile.
#[pyfunction]
fn psi(x: f64) -> f64 {
    stein_decomp::geometry::psi(x)
}

#[pymodule]
fn stein_decomp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ColoringModel>()?;
    m.add_function(wrap_pyfunction!(theorem1_functional, m)?)?;
    m.add_function(wrap_pyfunction!(proposition1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(kolmogorov_1d, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_dc, m)?)?;
    m.add_function(wrap_pyfunction!(stein_residual_halfline, m)?)?;
    m.add_function(wrap_pyfunction!(stein_residual_ball, m)?)?;
    m.add_function(wrap_pyfunction!(lemma5_check, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    Ok(())
}
