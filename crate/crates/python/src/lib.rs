//! Python bindings: the `convexlab` extension module.

use convexlab::bump::{bump_domain_2d, bump_polynomial as hermite_bump, BumpData, GraphDomain2D};
use convexlab::convexity::{classify_point, geometric_convexity_oracle, strong_convexify, OracleVerdict};
use convexlab::hulls::{is_extreme as extreme_test, minkowski_gauge as gauge, ExtremeVerdict};
use convexlab::order::{contact_order as order_at, ContactOrder, DEFAULT_CUTOFF};
use convexlab::{gallery, DomainSpec, Monomial, Point, Polynomial, Region};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(convexlab, ConvexlabError, PyException);

fn err(e: convexlab::Error) -> PyErr {
    ConvexlabError::new_err(e.to_string())
}

fn check_dim(d: &DomainSpec, x: &[f64]) -> PyResult<()> {
    if x.len() != d.dim() {
        return Err(err(convexlab::Error::DimensionMismatch { expected: d.dim(), got: x.len() }));
    }
    Ok(())
}

/// Bounded domain {rho < 0} in a box.
#[pyclass(name = "Domain", module = "convexlab", frozen)]
struct PyDomain {
    inner: DomainSpec,
}

#[pymethods]
impl PyDomain {
    #[staticmethod]
    fn gallery(name: &str) -> PyResult<Self> {
        Ok(PyDomain { inner: gallery::domain(name).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDomain { inner: DomainSpec::from_json(text).map_err(err)? })
    }

    /// rho = sum of coef * x^exp over `terms`, a list of (coef, exponents).
    #[staticmethod]
    fn polynomial(name: &str, terms: Vec<(f64, Vec<u32>)>, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Self> {
        let dim = lo.len();
        let m = terms.into_iter().map(|(coef, exp)| Monomial { exp, coef }).collect();
        let p = Polynomial::new(dim, m).map_err(err)?;
        Ok(PyDomain { inner: DomainSpec::polynomial(name, p, lo, hi).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        check_dim(&self.inner, &x)?;
        Ok(self.inner.value(&x))
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        check_dim(&self.inner, &x)?;
        Ok(self.inner.rho().grad(&x).as_slice().to_vec())
    }

    fn hessian(&self, x: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        check_dim(&self.inner, &x)?;
        let h = self.inner.rho().hess(&x);
        Ok(h.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        check_dim(&self.inner, &x)?;
        Ok(self.inner.contains(&x))
    }

    fn boundary_tol(&self) -> f64 {
        self.inner.boundary_tol()
    }

    /// List of (location, outward unit normal).
    #[pyo3(signature = (count, seed = 0))]
    fn sample_boundary(&self, count: usize, seed: u64) -> PyResult<Vec<(Vec<f64>, Vec<f64>)>> {
        let pts = self.inner.sample_boundary(count, seed).map_err(err)?;
        Ok(pts.iter().map(|b| (b.location.as_slice().to_vec(), b.normal.as_slice().to_vec())).collect())
    }

    fn __repr__(&self) -> String {
        format!("Domain({:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

#[pyfunction]
fn gallery_names() -> Vec<&'static str> {
    gallery::NAMES.to_vec()
}

/// Pointwise verdicts at sampled boundary points.
#[pyfunction]
#[pyo3(signature = (domain, count = 100, seed = 0))]
fn classify<'py>(py: Python<'py>, domain: &PyDomain, count: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let d = &domain.inner;
    let pts = d.sample_boundary(count, seed).map_err(err)?;
    pts.iter()
        .map(|b| {
            let v = classify_point(d, b).map_err(err)?;
            let row = PyDict::new(py);
            row.set_item("location", b.location.as_slice().to_vec())?;
            row.set_item("class", format!("{:?}", v.class))?;
            row.set_item("min_tangential_eigenvalue", v.min_tangential_eigenvalue)?;
            Ok(row)
        })
        .collect()
}

/// None when no violating segment was found, else (a, b, exit).
#[pyfunction]
#[pyo3(signature = (domain, pairs = 1000, seed = 0))]
fn convexity_oracle(domain: &PyDomain, pairs: usize, seed: u64) -> PyResult<Option<(Vec<f64>, Vec<f64>, Vec<f64>)>> {
    Ok(match geometric_convexity_oracle(&domain.inner, pairs, seed).map_err(err)? {
        OracleVerdict::Convex => None,
        OracleVerdict::NotConvex { a, b, exit } => Some((a, b, exit)),
    })
}

/// ("finite", m) or ("infinite", cutoff) at a boundary point.
#[pyfunction]
#[pyo3(signature = (domain, point, cutoff = DEFAULT_CUTOFF))]
fn contact_order(domain: &PyDomain, point: Vec<f64>, cutoff: u32) -> PyResult<(&'static str, u32)> {
    let d = &domain.inner;
    check_dim(d, &point)?;
    let bp = d.tangent_basis(&Point::from_vec(point)).map_err(err)?;
    Ok(match order_at(d, &bp, cutoff).map_err(err)?.order {
        ContactOrder::Finite(m) => ("finite", m),
        ContactOrder::Infinite(c) => ("infinite", c),
    })
}

/// lambda and the certified Hessian bound of (exp(lambda rho) - 1) / lambda.
#[pyfunction]
#[pyo3(signature = (domain, sphere_samples = 4096))]
fn convexify<'py>(py: Python<'py>, domain: &PyDomain, sphere_samples: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = strong_convexify(&domain.inner, sphere_samples).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("lambda", r.lambda)?;
    out.set_item("certified_c", r.certified_c)?;
    out.set_item("boundary_min_eigenvalue", r.boundary_min_eigenvalue)?;
    Ok(out)
}

/// None if the point is extreme, else a segment (a, b) through it.
#[pyfunction]
#[pyo3(signature = (shape, point, probe = 512))]
fn is_extreme(shape: &str, point: Vec<f64>, probe: usize) -> PyResult<Option<(Vec<f64>, Vec<f64>)>> {
    let s = gallery::shape(shape).map_err(err)?;
    Ok(match extreme_test(&s, &point, probe).map_err(err)? {
        ExtremeVerdict::Extreme => None,
        ExtremeVerdict::NotExtreme { a, b } => Some((a, b)),
    })
}

#[pyfunction]
fn minkowski_gauge(shape: &str, point: Vec<f64>) -> PyResult<f64> {
    let s = gallery::shape(shape).map_err(err)?;
    gauge(&s, &point).map_err(err)
}

/// Coefficients (lowest degree first) of the concave Hermite bump.
#[pyfunction]
fn bump_polynomial(a: f64, alpha: Vec<f64>, beta: Vec<f64>, gamma0: f64, k: usize) -> PyResult<Vec<f64>> {
    let p = hermite_bump(&BumpData::new(a, alpha, beta, gamma0, k)).map_err(err)?;
    Ok(p.coefficients_1d())
}

/// Outward bump of a 2D boundary near `at`.
#[pyfunction]
#[pyo3(signature = (domain, at, eps, k = 2))]
fn bump<'py>(py: Python<'py>, domain: &PyDomain, at: Vec<f64>, eps: f64, k: usize) -> PyResult<Bound<'py, PyDict>> {
    let g = GraphDomain2D::at(&domain.inner, &at).map_err(err)?;
    let b = bump_domain_2d(&g, eps, k).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("coefficients", b.polynomial.coefficients_1d())?;
    out.set_item("half_width", b.half_width)?;
    out.set_item("height", b.height)?;
    out.set_item("hausdorff", b.hausdorff)?;
    out.set_item("origin", b.graph.frame.origin.clone())?;
    out.set_item("tangent", b.graph.frame.tangent.clone())?;
    out.set_item("normal", b.graph.frame.normal.clone())?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "convexlab")]
fn convexlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ConvexlabError", m.py().get_type::<ConvexlabError>())?;
    m.add_class::<PyDomain>()?;
    m.add_function(wrap_pyfunction!(gallery_names, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(convexity_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(contact_order, m)?)?;
    m.add_function(wrap_pyfunction!(convexify, m)?)?;
    m.add_function(wrap_pyfunction!(is_extreme, m)?)?;
    m.add_function(wrap_pyfunction!(minkowski_gauge, m)?)?;
    m.add_function(wrap_pyfunction!(bump_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(bump, m)?)?;
    Ok(())
}
