//! Python bindings. Exact rationals cross the boundary as `"p/q"` strings,
//! patterns, parameters and instances as JSON text.

use hyperwalk::assoc::{self, Associativity, CertCase};
use hyperwalk::cli_io::{self, params_to_json};
use hyperwalk::complexity::{check_admissibility, cost_exponent};
use hyperwalk::lp::{optimize_over_schedules, solve_schedule, LpOptions, OptimizeConfig, OptimizeMode};
use hyperwalk::oracle::{self, QueryCounter};
use hyperwalk::pattern::{self, LoadingSchedule, ScheduleElement};
use hyperwalk::rational::format_rational;
use hyperwalk::schedule_enum::{count_complete_schedules, enumerate_complete_schedules, heuristic_schedules};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_elements(elements: &[String]) -> PyResult<LoadingSchedule> {
    elements
        .iter()
        .map(|e| e.parse::<ScheduleElement>().map_err(value_err))
        .collect::<PyResult<Vec<_>>>()
        .map(LoadingSchedule::new)
}

fn schedule_from(h: &pattern::PatternHypergraph, elements: Vec<String>) -> PyResult<LoadingSchedule> {
    let s = parse_elements(&elements)?;
    pattern::validate_schedule(h, &s).map_err(value_err)?;
    Ok(s)
}

/// A 3-uniform pattern hypergraph.
#[pyclass(name = "Pattern", module = "hyperwalk_py", frozen)]
struct PyPattern {
    inner: pattern::PatternHypergraph,
}

#[pymethods]
impl PyPattern {
    #[new]
    #[pyo3(signature = (kappa, triples, directed = false))]
    fn new(kappa: usize, triples: Vec<[u8; 3]>, directed: bool) -> PyResult<Self> {
        let inner = pattern::PatternHypergraph::new(kappa, triples, directed).map_err(value_err)?;
        Ok(PyPattern { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyPattern {
            inner: cli_io::parse_pattern(text).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn k4() -> Self {
        PyPattern {
            inner: pattern::PatternHypergraph::k4(),
        }
    }

    #[staticmethod]
    fn single_triple() -> Self {
        PyPattern {
            inner: pattern::PatternHypergraph::single_triple(),
        }
    }

    #[staticmethod]
    fn h7() -> Self {
        PyPattern {
            inner: pattern::PatternHypergraph::h7(),
        }
    }

    #[getter]
    fn kappa(&self) -> u8 {
        self.inner.kappa()
    }

    #[getter]
    fn triples(&self) -> Vec<[u8; 3]> {
        self.inner.triples().iter().map(|t| t.0).collect()
    }

    fn to_json(&self) -> String {
        cli_io::pattern_to_json(&self.inner).to_string()
    }

    /// Whether `schedule` (a list like `["v1", "p12", "t123"]`) is valid.
    fn is_valid_schedule(&self, schedule: Vec<String>) -> PyResult<bool> {
        let s = parse_elements(&schedule)?;
        Ok(pattern::is_valid_schedule(&self.inner, &s))
    }

    /// Number of complete schedules.
    fn count_schedules(&self) -> PyResult<u128> {
        count_complete_schedules(&self.inner).map_err(value_err)
    }

    /// First `limit` complete schedules in enumeration order.
    #[pyo3(signature = (limit = 1000))]
    fn schedules(&self, limit: usize) -> PyResult<Vec<Vec<String>>> {
        Ok(enumerate_complete_schedules(&self.inner)
            .map_err(value_err)?
            .take(limit)
            .map(|s| s.to_compact())
            .collect())
    }

    #[pyo3(signature = (budget, seed = hyperwalk::DEFAULT_SEED))]
    fn heuristic_schedules(&self, budget: usize, seed: u64) -> PyResult<Vec<Vec<String>>> {
        Ok(heuristic_schedules(&self.inner, budget, seed)
            .map_err(value_err)?
            .map(|s| s.to_compact())
            .collect())
    }

    /// Cost exponent of `schedule` at the parameters in `params_json`.
    /// Returns `(overall, setup, strict_ok)` with exact values as strings.
    #[pyo3(signature = (schedule, params_json, relax_vertex = true))]
    fn evaluate(&self, schedule: Vec<String>, params_json: &str, relax_vertex: bool) -> PyResult<(String, String, bool)> {
        let s = schedule_from(&self.inner, schedule)?;
        let p = cli_io::parse_params(params_json, &self.inner).map_err(value_err)?;
        let cost = cost_exponent(&self.inner, &s, &p).map_err(value_err)?;
        let adm = check_admissibility(&self.inner, &p, relax_vertex).map_err(value_err)?;
        Ok((
            format_rational(&cost.overall),
            format_rational(&cost.setup_exponent),
            adm.strict_ok,
        ))
    }

    /// Exact LP optimum for one schedule: `(exponent, witness_json)`.
    fn solve_schedule(&self, schedule: Vec<String>) -> PyResult<(String, String)> {
        let s = schedule_from(&self.inner, schedule)?;
        let o = solve_schedule(&self.inner, &s, &LpOptions::default()).map_err(runtime_err)?;
        Ok((format_rational(&o.exponent), params_to_json(&o.witness).to_string()))
    }

    /// Minimum exponent over schedules: `(exponent, argmins)`. Exhaustive
    /// unless `budget` is given.
    #[pyo3(signature = (budget = None, seed = hyperwalk::DEFAULT_SEED, jobs = None))]
    fn optimize(
        &self,
        py: Python<'_>,
        budget: Option<usize>,
        seed: u64,
        jobs: Option<usize>,
    ) -> PyResult<(String, Vec<Vec<String>>)> {
        let config = OptimizeConfig {
            mode: match budget {
                Some(budget) => OptimizeMode::Heuristic { budget, seed },
                None => OptimizeMode::Exhaustive,
            },
            jobs,
            ..OptimizeConfig::default()
        };
        let h = self.inner.clone();
        let r = py.detach(|| optimize_over_schedules(&h, &config)).map_err(runtime_err)?;
        Ok((
            format_rational(&r.exponent),
            r.argmins.iter().map(|s| s.to_compact()).collect(),
        ))
    }

    fn __repr__(&self) -> String {
        format!("Pattern({})", self.to_json())
    }
}

/// A ternary operator on `{1..n}` given as a row-major table.
#[pyclass(name = "TernaryOperator", module = "hyperwalk_py", frozen)]
struct PyOperator {
    inner: assoc::TernaryOperator,
}

fn parse_case(case: &str) -> PyResult<CertCase> {
    case.parse().map_err(value_err)
}

#[pymethods]
impl PyOperator {
    #[new]
    fn new(n: u32, table: Vec<u32>) -> PyResult<Self> {
        Ok(PyOperator {
            inner: assoc::TernaryOperator::new(n, table).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn modular_sum(n: u32) -> Self {
        PyOperator {
            inner: assoc::TernaryOperator::modular_sum(n),
        }
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    fn apply(&self, a: u32, b: u32, c: u32) -> PyResult<u32> {
        let n = self.inner.n();
        if [a, b, c].iter().any(|&x| x == 0 || x > n) {
            return Err(value_err(format!("arguments must lie in 1..={n}")));
        }
        Ok(self.inner.apply(a, b, c))
    }

    fn is_associative(&self) -> bool {
        assoc::is_associative(&self.inner) == Associativity::Associative
    }

    /// Lexicographically first certificate of case `"i"` or `"ii"`.
    fn certificate(&self, case: &str) -> PyResult<Option<[u32; 7]>> {
        Ok(assoc::find_certificate(&self.inner, parse_case(case)?).map(|c| c.tuple))
    }

    /// Certificates found as pattern occurrences in the weighted reduction.
    fn reduction_occurrences(&self, case: &str) -> PyResult<Vec<[u32; 7]>> {
        let red = assoc::build_reduction(&self.inner, parse_case(case)?);
        Ok(red.occurrences(&mut QueryCounter::new()))
    }
}

/// Lexicographically least copy of `pattern` in the instance, with the
/// number of oracle queries `(embedding, distinct, total)`.
#[pyfunction]
fn find(pattern: &PyPattern, instance_json: &str) -> PyResult<(Option<Vec<u32>>, u64, u64)> {
    let g = cli_io::parse_instance(instance_json).map_err(value_err)?;
    let mut counter = QueryCounter::new();
    let emb = oracle::find_subhypergraph(&g, &pattern.inner, &mut counter);
    Ok((emb, counter.distinct(), counter.total()))
}

#[pymodule]
fn hyperwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPattern>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(find, m)?)?;
    m.add("DEFAULT_SEED", hyperwalk::DEFAULT_SEED)?;
    Ok(())
}
