//! Python bindings for `qkdc`, exposed as the `pyqkdc` module.
//!
//! Matrices cross the boundary as nested lists of complex numbers together
//! with a list of subsystem dimensions. All values are in bits.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use qkdc::bounds;
use qkdc::divergences;
use qkdc::gaussian::{self, BosonicChannelParams};
use qkdc::qcore::apply_channel;
use qkdc::qcore::maximally_entangled;
use qkdc::simulate::{make_channel, ChannelFamily};
use qkdc::{CMat, DensityOperator};

create_exception!(pyqkdc, NumericalError, PyException, "A numerical procedure did not converge.");

fn to_py(e: qkdc::Error) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn matrix(rows: &[Vec<Complex64>]) -> Result<CMat, qkdc::Error> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(qkdc::Error::DimensionMismatch(format!("expected a square {d}x{d} matrix")));
    }
    Ok(CMat::from_fn(d, d, |i, j| rows[i][j]))
}

fn state(rows: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> Result<DensityOperator, qkdc::Error> {
    let m = matrix(&rows)?;
    let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
    DensityOperator::new(m, dims)
}

/// Reference state: PSD with unit trace, or merely positive when unnormalized.
fn reference(rows: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> Result<DensityOperator, qkdc::Error> {
    let m = matrix(&rows)?;
    let dims = dims.unwrap_or_else(|| vec![m.nrows()]);
    DensityOperator::positive(m, dims)
}

/// A converse, achievability or exact bound with its expansion terms.
#[pyclass(name = "BoundReport", module = "pyqkdc", frozen)]
pub struct PyBoundReport {
    inner: bounds::BoundReport,
}

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn family(&self) -> &str {
        &self.inner.family
    }

    #[getter]
    fn params(&self) -> Vec<(String, f64)> {
        self.inner.params.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    #[getter]
    fn eps(&self) -> f64 {
        self.inner.eps
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn value_bits(&self) -> f64 {
        self.inner.value_bits
    }

    #[getter]
    fn rate_bits(&self) -> f64 {
        self.inner.rate_bits
    }

    /// `(first, second, third)` order terms.
    #[getter]
    fn terms(&self) -> (f64, f64, f64) {
        (self.inner.terms.first, self.inner.terms.second, self.inner.terms.third)
    }

    #[getter]
    fn remainder_model(&self) -> &str {
        &self.inner.terms.remainder_model
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        bounds::BoundReport::from_json(text).map(|inner| Self { inner }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundReport(family={:?}, n={}, eps={}, kind={:?}, value_bits={})",
            self.inner.family,
            self.inner.n,
            self.inner.eps,
            self.inner.kind.as_str(),
            self.inner.value_bits
        )
    }
}

fn report(r: Result<bounds::BoundReport, qkdc::Error>) -> PyResult<PyBoundReport> {
    r.map(|inner| PyBoundReport { inner }).map_err(to_py)
}

#[pyfunction]
fn dephasing_boundary(gamma: f64, n: u64, eps: f64) -> PyResult<PyBoundReport> {
    report(bounds::dephasing_boundary(gamma, n, eps))
}

#[pyfunction]
fn erasure_boundary(p: f64, n: u64, eps: f64) -> PyResult<PyBoundReport> {
    report(bounds::erasure_boundary(p, n, eps))
}

#[pyfunction]
fn eb_bound(n: u64, eps: f64) -> PyResult<f64> {
    bounds::eb_bound(n, eps).map_err(to_py)
}

#[pyfunction]
fn second_order_rate(d: f64, v: f64, eps: f64, n: u64) -> PyResult<PyBoundReport> {
    report(bounds::second_order_rate(d, v, eps, n))
}

#[pyfunction]
fn c_eps(eps: f64) -> f64 {
    bounds::c_eps(eps)
}

#[pyfunction]
fn chebyshev_dh_bound(d: f64, v: f64, eps: f64, n: u64) -> PyResult<f64> {
    bounds::chebyshev_dh_bound(d, v, eps, n).map_err(to_py)
}

fn bosonic(kind: &str, eta: Option<f64>, nb: f64, gain: Option<f64>, xi: Option<f64>) -> PyResult<BosonicChannelParams> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| PyValueError::new_err(format!("{kind} needs {name}")));
    let params = match kind {
        "thermal" => BosonicChannelParams::Thermal { eta: need(eta, "eta")?, nb },
        "pure-loss" => BosonicChannelParams::pure_loss(need(eta, "eta")?),
        "amplifier" => BosonicChannelParams::Amplifier { gain: need(gain, "gain")?, nb },
        "ql-amplifier" => BosonicChannelParams::quantum_limited_amplifier(need(gain, "gain")?),
        "additive" => BosonicChannelParams::Additive { xi: need(xi, "xi")? },
        other => return Err(PyValueError::new_err(format!("unknown bosonic channel kind {other:?}"))),
    };
    params.validate().map_err(to_py)?;
    Ok(params)
}

/// Finite-blocklength converse for a bosonic Gaussian channel.
#[pyfunction]
#[pyo3(signature = (kind, n, eps, *, eta=None, nb=0.0, gain=None, xi=None))]
fn gaussian_bound(kind: &str, n: u64, eps: f64, eta: Option<f64>, nb: f64, gain: Option<f64>, xi: Option<f64>) -> PyResult<PyBoundReport> {
    report(gaussian::finite_n_bound(&bosonic(kind, eta, nb, gain, xi)?, n, eps))
}

/// Unconstrained asymptotic converse for a bosonic Gaussian channel.
#[pyfunction]
#[pyo3(signature = (kind, *, eta=None, nb=0.0, gain=None, xi=None))]
fn gaussian_asymptotic(kind: &str, eta: Option<f64>, nb: f64, gain: Option<f64>, xi: Option<f64>) -> PyResult<f64> {
    gaussian::asymptotic_bound(&bosonic(kind, eta, nb, gain, xi)?).map_err(to_py)
}

/// `(D, V)` between the channel output on a two-mode squeezed vacuum of
/// energy `mu` and its separable reference.
#[pyfunction]
#[pyo3(signature = (kind, mu, *, eta=None, nb=0.0, gain=None, xi=None))]
fn gaussian_divergences(kind: &str, mu: f64, eta: Option<f64>, nb: f64, gain: Option<f64>, xi: Option<f64>) -> PyResult<(f64, f64)> {
    gaussian::channel_rel_entropy_and_variance(&bosonic(kind, eta, nb, gain, xi)?, mu).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, eps, dims=None))]
fn hypothesis_test_divergence(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, eps: f64, dims: Option<Vec<usize>>) -> PyResult<f64> {
    let rho = state(rho, dims.clone()).map_err(to_py)?;
    let sigma = reference(sigma, dims).map_err(to_py)?;
    divergences::hypothesis_test_divergence(&rho, &sigma, eps).map(|r| r.value).map_err(to_py)
}

#[pyfunction]
fn hypothesis_test_divergence_iid(p: Vec<f64>, q: Vec<f64>, eps: f64, n: u64) -> PyResult<f64> {
    divergences::hypothesis_test_divergence_classical_iid(&p, &q, eps, n).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, dims=None))]
fn rel_entropy(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> PyResult<f64> {
    let rho = state(rho, dims.clone()).map_err(to_py)?;
    let sigma = reference(sigma, dims).map_err(to_py)?;
    divergences::rel_entropy(&rho, &sigma).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, dims=None))]
fn rel_entropy_variance(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> PyResult<f64> {
    let rho = state(rho, dims.clone()).map_err(to_py)?;
    let sigma = reference(sigma, dims).map_err(to_py)?;
    divergences::rel_entropy_variance(&rho, &sigma).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, alpha, dims=None))]
fn sandwiched_renyi(rho: Vec<Vec<Complex64>>, sigma: Vec<Vec<Complex64>>, alpha: f64, dims: Option<Vec<usize>>) -> PyResult<f64> {
    let rho = state(rho, dims.clone()).map_err(to_py)?;
    let sigma = reference(sigma, dims).map_err(to_py)?;
    divergences::sandwiched_renyi(&rho, &sigma, alpha).map_err(to_py)
}

/// Meta-converse witness for a channel given as JSON, with the maximally
/// entangled input. Without `sep_ref` the reference is the channel output
/// itself, which is separable for entanglement-breaking channels.
#[pyfunction]
#[pyo3(signature = (channel, eps, n=1, sep_ref=None))]
fn meta_converse(channel: &str, eps: f64, n: u64, sep_ref: Option<Vec<Vec<Complex64>>>) -> PyResult<PyBoundReport> {
    let spec: ChannelFamily = serde_json::from_str(channel).map_err(|e| PyValueError::new_err(format!("channel spec: {e}")))?;
    let ch = make_channel(&spec).map_err(to_py)?;
    let input = maximally_entangled(ch.in_dim()).map_err(to_py)?;
    let tau = match sep_ref {
        Some(rows) => state(rows, Some(vec![ch.in_dim(), ch.out_dim()])).map_err(to_py)?,
        None => apply_channel(&ch, &input, 1).map_err(to_py)?,
    };
    report(bounds::meta_converse_iid(&ch, &input, &tau, eps, n).map(|r| r.with_family(spec.name(), &[])))
}

/// Run the command line; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let out = qkdc::cli::run(std::iter::once("qkdc".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
fn pyqkdc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyBoundReport>()?;
    m.add_function(wrap_pyfunction!(dephasing_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(erasure_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(eb_bound, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_rate, m)?)?;
    m.add_function(wrap_pyfunction!(c_eps, m)?)?;
    m.add_function(wrap_pyfunction!(chebyshev_dh_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_divergences, m)?)?;
    m.add_function(wrap_pyfunction!(hypothesis_test_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(hypothesis_test_divergence_iid, m)?)?;
    m.add_function(wrap_pyfunction!(rel_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(rel_entropy_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sandwiched_renyi, m)?)?;
    m.add_function(wrap_pyfunction!(meta_converse, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
