use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quartic_cert::cert::Certificate;
use quartic_cert::certify::{CertifyOptions, MethodChoice};
use quartic_cert::gen::{corpus, Kind};
use quartic_cert::poly::{parse_poly, HomogPoly};
use quartic_cert::sdp::SdpOptions;
use quartic_cert::sos;
use quartic_cert::sphere::{self, SphereOptions};
use quartic_cert::verify::DEFAULT_TOL;
use quartic_cert::Error;

create_exception!(qcert, CertifyError, PyException);
create_exception!(qcert, RejectedError, CertifyError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Rejected { witness, value } => {
            RejectedError::new_err((format!("input is negative: f = {value:e}"), witness, value))
        }
        Error::Parse(_) | Error::InvalidInput(_) | Error::Mismatch { .. } | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => CertifyError::new_err(other.to_string()),
    }
}

/// A homogeneous polynomial in x0..x3.
#[pyclass(name = "Poly", frozen)]
struct PyPoly {
    inner: HomogPoly,
}

#[pymethods]
impl PyPoly {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = parse_poly(text).map_err(|e| to_py(e.into()))?;
        Ok(PyPoly { inner })
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    /// Coefficients in graded-lex order.
    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.nvars() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.nvars(),
                x.len()
            )));
        }
        Ok(self.inner.eval(&x))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly({:?})", self.inner.to_string())
    }
}

fn poly_arg(p: &Bound<'_, PyAny>) -> PyResult<HomogPoly> {
    if let Ok(p) = p.cast::<PyPoly>() {
        return Ok(p.get().inner.clone());
    }
    let text: String = p.extract()?;
    parse_poly(&text).map_err(|e| to_py(e.into()))
}

/// Minimizes a quartic on the unit sphere.
#[pyfunction]
#[pyo3(signature = (poly, seed = 0))]
fn min_on_sphere<'py>(py: Python<'py>, poly: &Bound<'py, PyAny>, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let f = poly_arg(poly)?;
    let opts = SphereOptions {
        seed,
        ..Default::default()
    };
    let m = py.detach(|| sphere::min_on_sphere(&f, &opts)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("xstar", m.xstar)?;
    d.set_item("value", m.value)?;
    d.set_item("grad_tangent_norm", m.grad_tangent_norm)?;
    d.set_item("classification", format!("{:?}", m.classification))?;
    Ok(d)
}

/// Returns `(verdict, t_star)` with verdict one of IsSos, NotSos, Inconclusive.
#[pyfunction]
fn sos_check(py: Python<'_>, poly: &Bound<'_, PyAny>) -> PyResult<(String, f64)> {
    let f = poly_arg(poly)?;
    let c = py.detach(|| sos::sos_check(&f, &SdpOptions::default())).map_err(to_py)?;
    Ok((c.verdict.to_string(), c.t_star))
}

/// Certifies a quartic and returns the certificate as JSON text.
#[pyfunction]
#[pyo3(signature = (poly, method = "auto", tol = DEFAULT_TOL, seed = 0))]
fn certify(py: Python<'_>, poly: &Bound<'_, PyAny>, method: &str, tol: f64, seed: u64) -> PyResult<String> {
    let f = poly_arg(poly)?;
    let method: MethodChoice = method.parse().map_err(to_py)?;
    let opts = CertifyOptions {
        method,
        tol,
        sphere: SphereOptions {
            seed,
            ..Default::default()
        },
        sdp: SdpOptions::default(),
    };
    let cert = py.detach(|| quartic_cert::certify::certify(&f, &opts)).map_err(to_py)?;
    cert.to_json().map_err(to_py)
}

/// Checks a JSON certificate against `poly`; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (poly, cert, tol = DEFAULT_TOL))]
fn verify(poly: &Bound<'_, PyAny>, cert: &str, tol: f64) -> PyResult<(bool, String)> {
    let f = poly_arg(poly)?;
    let cert = Certificate::from_json(cert).map_err(to_py)?;
    let report = quartic_cert::verify::verify_certificate(&f, &cert, tol);
    let json = serde_json::to_string(&report).map_err(|e| to_py(e.into()))?;
    Ok((report.passed, json))
}

/// Seeded test polynomials of kind sos, soseps, choilam or indefinite.
#[pyfunction]
#[pyo3(signature = (kind, seed = 0, count = 1, eps = 1e-3, squares = 4))]
fn generate(kind: &str, seed: u64, count: usize, eps: f64, squares: usize) -> PyResult<Vec<PyPoly>> {
    let kind: Kind = kind.parse().map_err(to_py)?;
    Ok(corpus(kind, seed, count, eps, squares)
        .into_iter()
        .map(|inner| PyPoly { inner })
        .collect())
}

#[pymodule]
fn qcert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_function(wrap_pyfunction!(min_on_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(sos_check, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add("CertifyError", m.py().get_type::<CertifyError>())?;
    m.add("RejectedError", m.py().get_type::<RejectedError>())?;
    Ok(())
}
