//! Python bindings for defq.

use defq::charclass::PowerSeries;
use defq::trace_grid::{chi_tr_u0, corpus_from_json, mu_tilde};
use defq::{Shape, WeylElement};
use defq_cli::{cmd_build, cmd_pair, cmd_verify, Outcome, Suite, TraceNormalization, U0Convention};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_json(text: &str) -> PyResult<serde_json::Value> {
    serde_json::from_str(text).map_err(value_error)
}

/// Truncated matrix-valued Weyl algebra element with exact coefficients.
#[pyclass(name = "WeylElement", module = "defq_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWeyl(WeylElement);

#[pymethods]
impl PyWeyl {
    /// `x_j` in `n` pairs of variables, `size`x`size` matrices, truncation degree `degree`.
    #[staticmethod]
    fn x(n: usize, size: usize, degree: i32, j: usize) -> PyResult<Self> {
        check_index(n, j)?;
        Ok(Self(WeylElement::x(Shape::new(n, size, degree), j)))
    }

    #[staticmethod]
    fn xi(n: usize, size: usize, degree: i32, j: usize) -> PyResult<Self> {
        check_index(n, j)?;
        Ok(Self(WeylElement::xi(Shape::new(n, size, degree), j)))
    }

    #[staticmethod]
    fn hbar(n: usize, size: usize, degree: i32) -> Self {
        Self(WeylElement::hbar(Shape::new(n, size, degree)))
    }

    #[staticmethod]
    fn one(n: usize, size: usize, degree: i32) -> Self {
        Self(WeylElement::one(Shape::new(n, size, degree)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        WeylElement::from_json(&parse_json(text)?).map(Self).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn star(&self, other: &Self) -> PyResult<Self> {
        self.0.star(&other.0).map(Self).map_err(value_error)
    }

    fn commutator(&self, other: &Self) -> PyResult<Self> {
        self.0.commutator(&other.0).map(Self).map_err(value_error)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.add(&other.0).map(Self).map_err(value_error)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.sub(&other.0).map(Self).map_err(value_error)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.star(other)
    }

    fn __neg__(&self) -> Self {
        Self(self.0.neg())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let s = self.0.shape();
        format!("WeylElement(n={}, N={}, D={}, terms={})", s.n, s.size, s.degree, self.0.len())
    }
}

fn check_index(n: usize, j: usize) -> PyResult<()> {
    if j < n {
        Ok(())
    } else {
        Err(value_error(format!("variable index {j} out of range for n={n}")))
    }
}

fn pair_outcome(outcome: Outcome) -> (String, u8) {
    (outcome.text, outcome.exit as u8)
}

fn parse_suite(name: &str) -> PyResult<Suite> {
    match name {
        "moyal" => Ok(Suite::Moyal),
        "cyclic" => Ok(Suite::Cyclic),
        "charclass" => Ok(Suite::Charclass),
        other => Err(value_error(format!("unknown suite {other:?}"))),
    }
}

/// Run a seeded property suite; returns `(report_json, exit_code)`.
#[pyfunction]
#[pyo3(signature = (suite, trials = 50, seed = 0))]
fn verify(suite: &str, trials: usize, seed: u64) -> PyResult<(String, u8)> {
    Ok(pair_outcome(cmd_verify(parse_suite(suite)?, trials, seed)))
}

/// Build the Fedosov connection of a chart given as JSON text.
#[pyfunction]
#[pyo3(signature = (chart, degree = 4, jet_order = None))]
fn build(chart: &str, degree: i32, jet_order: Option<usize>) -> PyResult<(String, u8)> {
    cmd_build(chart.as_bytes(), degree, jet_order).map(pair_outcome).map_err(value_error)
}

/// hbar-scaling study of a bump corpus; returns `(csv_text, exit_code)`.
#[pyfunction]
#[pyo3(signature = (corpus, grid = None, hbar = 0.1, halvings = 3, normalized = true, signed = true))]
fn pair(corpus: &str, grid: Option<usize>, hbar: f64, halvings: usize, normalized: bool, signed: bool) -> PyResult<(String, u8)> {
    let normalization = if normalized { TraceNormalization::Normalized } else { TraceNormalization::Unnormalized };
    let convention = if signed { U0Convention::Signed } else { U0Convention::Unsigned };
    cmd_pair(corpus.as_bytes(), grid, hbar, halvings, normalization, convention).map(pair_outcome).map_err(value_error)
}

/// Laurent coefficients of the pairing with the fundamental class, keyed by hbar power.
#[pyfunction]
#[pyo3(signature = (corpus, normalized = true, signed = true))]
fn chi(corpus: &str, normalized: bool, signed: bool) -> PyResult<Vec<(i32, Complex64)>> {
    let (_, symbols) = corpus_from_json(&parse_json(corpus)?).map_err(value_error)?;
    let laurent = chi_tr_u0(&symbols, signed, normalized).map_err(value_error)?;
    Ok(laurent.coeffs.iter().enumerate().map(|(k, c)| (laurent.lowest + k as i32, *c)).collect())
}

/// Integral of the top-degree cocycle over the corpus symbols.
#[pyfunction]
#[pyo3(signature = (corpus, normalized = true))]
fn mu(corpus: &str, normalized: bool) -> PyResult<Complex64> {
    let (_, symbols) = corpus_from_json(&parse_json(corpus)?).map_err(value_error)?;
    mu_tilde(&symbols, normalized).map_err(value_error)
}

/// Taylor coefficients of `(x/2)/sinh(x/2)` as exact fraction strings.
#[pyfunction]
fn a_hat_series(terms: usize) -> Vec<String> {
    PowerSeries::a_hat_generator(terms).0.iter().map(|c| c.to_string()).collect()
}

#[pymodule]
fn defq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWeyl>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(pair, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(mu, m)?)?;
    m.add_function(wrap_pyfunction!(a_hat_series, m)?)?;
    Ok(())
}
