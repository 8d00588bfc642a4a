//! Python module `kemeny`. Exact quantities cross the boundary as
//! `fractions.Fraction`; polynomials as coefficient lists, lowest degree
//! first.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use kemeny_core::exactalg::parse_rational;
use kemeny_core::hitting::HittingAnalysis;
use kemeny_core::matrix::Matrix;
use kemeny_core::mcsim::{self, SimConfig, Target};
use kemeny_core::report::{build_report, ReportOptions};
use kemeny_core::{InputFormat, Polynomial, Rational};
use pyo3::exceptions::{PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn coeffs(p: &Polynomial) -> Vec<Rational> {
    p.coeffs().to_vec()
}

fn rows(m: &Matrix<Rational>) -> Vec<Vec<Rational>> {
    m.to_rows()
}

/// `(id, name, passed, witness)` of one identity check.
type CheckRow = (String, String, bool, Option<String>);

/// A matrix entry given as `Fraction`, `int` or a string like `"5/12"`.
#[derive(FromPyObject)]
enum Entry {
    Exact(Rational),
    Text(String),
}

impl Entry {
    fn into_rational(self) -> PyResult<Rational> {
        match self {
            Entry::Exact(r) => Ok(r),
            Entry::Text(s) => parse_rational(&s).map_err(value_err),
        }
    }
}

/// A state given by label or by position.
#[derive(FromPyObject)]
enum StateRef {
    Index(usize),
    Label(String),
}

/// An irreducible finite Markov chain with exact rational transitions.
#[pyclass(module = "kemeny", frozen)]
struct Chain {
    inner: kemeny_core::Chain,
    analysis: OnceLock<HittingAnalysis>,
}

impl Chain {
    fn wrap(inner: kemeny_core::Chain) -> Self {
        Self {
            inner,
            analysis: OnceLock::new(),
        }
    }

    fn analysis(&self, py: Python<'_>) -> PyResult<&HittingAnalysis> {
        if let Some(a) = self.analysis.get() {
            return Ok(a);
        }
        let built = py.detach(|| HittingAnalysis::new(&self.inner)).map_err(value_err)?;
        Ok(self.analysis.get_or_init(|| built))
    }

    fn index(&self, s: StateRef) -> PyResult<usize> {
        match s {
            StateRef::Index(i) if i < self.inner.dim() => Ok(i),
            StateRef::Index(i) => Err(PyIndexError::new_err(format!("state index {i} out of range"))),
            StateRef::Label(l) => self.inner.state_index(&l).map_err(value_err),
        }
    }

    fn sim_err(e: mcsim::SimError) -> PyErr {
        match e {
            mcsim::SimError::StepCapExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
            other => value_err(other),
        }
    }
}

#[pymethods]
impl Chain {
    #[new]
    #[pyo3(signature = (rows, states=None))]
    fn new(rows: Vec<Vec<Entry>>, states: Option<Vec<String>>) -> PyResult<Self> {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(Entry::into_rational).collect::<PyResult<Vec<_>>>())
            .collect::<PyResult<Vec<_>>>()?;
        let chain = match states {
            Some(states) => kemeny_core::Chain::new(states, rows),
            None => kemeny_core::Chain::from_rows(rows),
        };
        Ok(Self::wrap(chain.map_err(value_err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self::wrap(kemeny_core::Chain::parse(text, InputFormat::Json).map_err(value_err)?))
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self::wrap(kemeny_core::Chain::parse(text, InputFormat::Csv).map_err(value_err)?))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.states().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<Rational>> {
        rows(self.inner.matrix())
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("Chain(states={:?})", self.inner.states())
    }

    fn stationary(&self, py: Python<'_>) -> PyResult<Vec<Rational>> {
        Ok(self.analysis(py)?.stationary())
    }

    /// Coefficients of `det(Id - xM)`.
    fn det_poly(&self, py: Python<'_>) -> PyResult<Vec<Rational>> {
        Ok(coeffs(&self.analysis(py)?.bundle().det_poly))
    }

    /// `det(Id - xM) / (1 - x)`.
    fn k0(&self, py: Python<'_>) -> PyResult<Vec<Rational>> {
        Ok(coeffs(&self.analysis(py)?.bundle().k0))
    }

    /// `pi_v(x) = det(Id - x M^(v))` for every state, `M^(v)` being `M`
    /// without row and column `v`.
    fn pi_polys(&self, py: Python<'_>) -> PyResult<Vec<Vec<Rational>>> {
        Ok(self.analysis(py)?.bundle().pi.iter().map(coeffs).collect())
    }

    /// `Z = sum_v pi_v(1)`.
    fn z(&self, py: Python<'_>) -> PyResult<Rational> {
        Ok(self.analysis(py)?.bundle().z.clone())
    }

    /// `(numerator, denominator)` of the generating function of the first
    /// time `k >= t` at which the chain started at `u` sits in `v`.
    #[pyo3(signature = (u, v, t=0))]
    fn hitting_gf(&self, py: Python<'_>, u: StateRef, v: StateRef, t: usize) -> PyResult<(Vec<Rational>, Vec<Rational>)> {
        let (u, v) = (self.index(u)?, self.index(v)?);
        let g = self.analysis(py)?.gf(u, v, t).map_err(value_err)?;
        Ok((coeffs(g.gf.num()), coeffs(g.gf.den())))
    }

    /// First `n` power-series coefficients of `hitting_gf(u, v, t)`.
    #[pyo3(signature = (u, v, t=0, n=20))]
    fn hitting_series(&self, py: Python<'_>, u: StateRef, v: StateRef, t: usize, n: usize) -> PyResult<Vec<Rational>> {
        let (u, v) = (self.index(u)?, self.index(v)?);
        let g = self.analysis(py)?.gf(u, v, t).map_err(value_err)?;
        g.gf.series(n).map_err(value_err)
    }

    /// `P_u(tau_v^{>=0} = m)` for `m = 0..=m_max`.
    fn hitting_distribution(&self, py: Python<'_>, u: StateRef, v: StateRef, m_max: usize) -> PyResult<Vec<Rational>> {
        let (u, v) = (self.index(u)?, self.index(v)?);
        let a = self.analysis(py)?;
        py.detach(|| a.hitting_distribution(u, v, m_max)).map_err(value_err)
    }

    /// `table[k][u][v]`, the `k`-th factorial moment of `tau_v^{>=1}` from `u`.
    #[pyo3(signature = (k_max=4))]
    fn factorial_moments(&self, py: Python<'_>, k_max: usize) -> PyResult<Vec<Vec<Vec<Rational>>>> {
        let a = self.analysis(py)?;
        let table = py.detach(|| a.factorial_moments(k_max)).map_err(value_err)?;
        Ok(table.by_order.iter().map(rows).collect())
    }

    fn mean_hitting_times(&self, py: Python<'_>) -> PyResult<Vec<Vec<Rational>>> {
        Ok(rows(&self.analysis(py)?.mean_hitting_times()))
    }

    /// The Kemeny constant by mean hitting times, by `K0`, and by the
    /// floating-point eigenvalues.
    fn kemeny<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let k = self.analysis(py)?.kemeny().map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("by_mean_hitting", k.by_mean_hitting)?;
        d.set_item("by_polynomial", k.by_polynomial)?;
        d.set_item("by_eigenvalues", k.by_eigenvalues)?;
        d.set_item("eigen_imag_residual", k.eigen_imag_residual)?;
        d.set_item("q1", k.q1)?;
        d.set_item("z", k.z)?;
        Ok(d)
    }

    fn verify_identities(&self, py: Python<'_>) -> PyResult<Vec<CheckRow>> {
        let a = self.analysis(py)?;
        let report = py.detach(|| a.verify_identities());
        Ok(report
            .checks
            .into_iter()
            .map(|c| (c.id.to_string(), c.name.to_string(), c.passed, c.witness))
            .collect())
    }

    /// Exact law `P_u(tau_v^{>=0} = m)` by dynamic programming on the taboo
    /// matrix; one list per start `u`.
    fn dp_oracle(&self, py: Python<'_>, v: StateRef, m_max: usize) -> PyResult<Vec<Vec<Rational>>> {
        let v = self.index(v)?;
        let table = py
            .detach(|| mcsim::dp_hitting_oracle(&self.inner, v, m_max))
            .map_err(Self::sim_err)?;
        Ok((0..self.inner.dim()).map(|u| table.law(u).to_vec()).collect())
    }

    /// `P_u(C_Geo = v)` for an independent geometric time with
    /// `P(Geo = k) = x0^k (1 - x0)`.
    fn geometric_stop_law(&self, py: Python<'_>, u: StateRef, x0: Entry) -> PyResult<Vec<Rational>> {
        let u = self.index(u)?;
        let x0 = x0.into_rational()?;
        self.analysis(py)?.geometric_stop_law(u, &x0).map_err(value_err)
    }

    /// Simulates `tau_v^{>=t}` from `u`; with `v=None` the target is drawn
    /// from the stationary law per path.
    #[pyo3(signature = (u, v=None, t=1, seed=0, paths=10_000, max_steps=mcsim::DEFAULT_MAX_STEPS))]
    #[allow(clippy::too_many_arguments)]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        u: StateRef,
        v: Option<StateRef>,
        t: u64,
        seed: u64,
        paths: usize,
        max_steps: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let u = self.index(u)?;
        let target = match v {
            Some(v) => Target::State(self.index(v)?),
            None => Target::Stationary,
        };
        let cfg = SimConfig {
            max_steps,
            ..SimConfig::new(seed, paths)
        };
        let s = py
            .detach(|| mcsim::simulate_hitting(&self.inner, u, target, t, &cfg))
            .map_err(Self::sim_err)?;
        let d = PyDict::new(py);
        d.set_item("n_paths", s.n_paths)?;
        d.set_item("mean", s.mean)?;
        d.set_item("variance", s.variance)?;
        d.set_item("std_error", s.std_error)?;
        d.set_item("histogram", s.histogram.into_iter().collect::<BTreeMap<_, _>>())?;
        Ok(d)
    }

    /// Empirical frequencies and standard errors of the state at an
    /// independent geometric time.
    #[pyo3(signature = (u, x0, seed=0, paths=10_000))]
    fn simulate_geometric_stop(
        &self,
        py: Python<'_>,
        u: StateRef,
        x0: Entry,
        seed: u64,
        paths: usize,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let u = self.index(u)?;
        let x0 = x0.into_rational()?;
        let cfg = SimConfig::new(seed, paths);
        let s = py
            .detach(|| mcsim::simulate_geometric_stop(&self.inner, u, &x0, &cfg))
            .map_err(Self::sim_err)?;
        Ok((s.frequencies, s.std_errors))
    }

    /// The full analysis report as a JSON string.
    #[pyo3(signature = (k_max=4))]
    fn report(&self, py: Python<'_>, k_max: usize) -> PyResult<String> {
        let opts = ReportOptions {
            k_max,
            simulation: None,
        };
        let report = py.detach(|| build_report(&self.inner, &opts)).map_err(value_err)?;
        Ok(report.to_json_string())
    }
}

#[pymodule]
fn kemeny(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Chain>()?;
    m.add("DEFAULT_MAX_STEPS", mcsim::DEFAULT_MAX_STEPS)?;
    Ok(())
}
