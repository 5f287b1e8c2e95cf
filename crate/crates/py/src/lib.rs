//! Python bindings. Denominators are passed as `Multiset` objects or any
//! iterable of positive integers; targets as anything whose `str()` is an
//! integer or `p/q` (so `int`, `str` and `fractions.Fraction` all work).
//! Results come back as lists of ascending integer lists, and rationals as
//! `p/q` strings.

use ::ufrac::apps::{self, ConjectureConfig, ConjectureOutcome};
use ::ufrac::{DenomMultiset, Error, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(msg) => PyValueError::new_err(msg),
        Error::ResourceLimit(msg) | Error::Internal(msg) => PyRuntimeError::new_err(msg),
    }
}

fn denoms_arg(obj: &Bound<'_, PyAny>) -> PyResult<DenomMultiset> {
    if let Ok(m) = obj.extract::<PyRef<'_, Multiset>>() {
        return Ok(m.inner.clone());
    }
    let values: Vec<i64> = obj
        .try_iter()?
        .map(|v| v.and_then(|v| v.extract::<i64>()))
        .collect::<PyResult<_>>()?;
    DenomMultiset::from_elements(values).map_err(to_py_err)
}

fn target_arg(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = obj.str()?.to_string();
    text.trim()
        .parse()
        .map_err(|e: Error| PyValueError::new_err(format!("invalid target `{text}`: {e}")))
}

fn lists(reps: &[DenomMultiset]) -> Vec<Vec<u64>> {
    reps.iter().map(DenomMultiset::to_vec).collect()
}

/// A finite multiset of positive integers.
#[pyclass(
    name = "Multiset",
    module = "ufrac_py",
    eq,
    frozen,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
pub struct Multiset {
    inner: DenomMultiset,
}

#[pymethods]
impl Multiset {
    #[new]
    #[pyo3(signature = (values = None))]
    fn new(values: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let inner = match values {
            Some(v) => denoms_arg(v)?,
            None => DenomMultiset::new(),
        };
        Ok(Multiset { inner })
    }

    /// The integers `lo..=hi`.
    #[staticmethod]
    fn range(lo: u64, hi: u64) -> PyResult<Self> {
        if lo == 0 {
            return Err(PyValueError::new_err("denominators must be positive"));
        }
        Ok(Multiset {
            inner: DenomMultiset::range(lo, hi),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, value: u64) -> bool {
        self.inner.contains(value)
    }

    fn __repr__(&self) -> String {
        format!("Multiset({:?})", self.inner.to_vec())
    }

    fn to_list(&self) -> Vec<u64> {
        self.inner.to_vec()
    }

    fn multiplicity(&self, value: u64) -> u32 {
        self.inner.multiplicity(value)
    }

    fn union(&self, other: &Multiset) -> Multiset {
        Multiset {
            inner: self.inner.union(&other.inner),
        }
    }

    fn reciprocal_sum(&self) -> String {
        ::ufrac::reciprocal_sum(&self.inner).to_string()
    }
}

/// A search node: unexamined denominators, reserved denominators, residual
/// target and the difference `R(D) - r`.
#[pyclass(name = "Branch", module = "ufrac_py", frozen)]
pub struct Branch {
    inner: ::ufrac::Branch,
}

#[pymethods]
impl Branch {
    #[new]
    fn new(denoms: &Bound<'_, PyAny>, target: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Branch {
            inner: ::ufrac::Branch::new(denoms_arg(denoms)?, target_arg(target)?),
        })
    }

    #[getter]
    fn denoms(&self) -> Vec<u64> {
        self.inner.denoms().to_vec()
    }

    #[getter]
    fn reserved(&self) -> Vec<u64> {
        self.inner.reserved().to_vec()
    }

    #[getter]
    fn r(&self) -> String {
        self.inner.r().to_string()
    }

    #[getter]
    fn original_r(&self) -> String {
        self.inner.original_r().to_string()
    }

    #[getter]
    fn diff(&self) -> String {
        self.inner.diff().to_string()
    }

    /// Greatest prime power of the difference's denominator as `(p, t)`.
    #[getter]
    fn gpp(&self) -> Option<(String, u32)> {
        self.inner
            .gpp()
            .map(|g| (g.prime().to_string(), g.exponent()))
    }

    fn reserve(&self, e: &Bound<'_, PyAny>) -> PyResult<Branch> {
        let inner = self.inner.reserve(&denoms_arg(e)?).map_err(to_py_err)?;
        Ok(Branch { inner })
    }

    fn remove(&self, e: &Bound<'_, PyAny>) -> PyResult<Branch> {
        let inner = self.inner.remove(&denoms_arg(e)?).map_err(to_py_err)?;
        Ok(Branch { inner })
    }

    fn reduce(&self) -> Branch {
        Branch {
            inner: self.inner.reduce(),
        }
    }

    /// One kill step: `(representations, pending)` as branches.
    fn kill(&self) -> (Vec<Branch>, Vec<Branch>) {
        let res = ::ufrac::kill(&self.inner);
        let wrap = |v: Vec<::ufrac::Branch>| v.into_iter().map(|inner| Branch { inner }).collect();
        (wrap(res.representations), wrap(res.pending))
    }

    fn representation(&self) -> Vec<u64> {
        self.inner.representation().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Branch({:?})", self.inner)
    }
}

/// Every submultiset of `denoms` whose reciprocals sum to `target`.
#[pyfunction(name = "ufrac")]
fn solve_all(
    py: Python<'_>,
    denoms: &Bound<'_, PyAny>,
    target: &Bound<'_, PyAny>,
) -> PyResult<Vec<Vec<u64>>> {
    let (d, r) = (denoms_arg(denoms)?, target_arg(target)?);
    let reps = py
        .detach(move || ::ufrac::ufrac(&d, &r))
        .map_err(to_py_err)?;
    Ok(lists(&reps))
}

/// The first representation found, or `None`.
#[pyfunction]
fn ufrac_first(
    py: Python<'_>,
    denoms: &Bound<'_, PyAny>,
    target: &Bound<'_, PyAny>,
) -> PyResult<Option<Vec<u64>>> {
    let (d, r) = (denoms_arg(denoms)?, target_arg(target)?);
    let rep = py
        .detach(move || ::ufrac::ufrac_early_stopping(&d, &r))
        .map_err(to_py_err)?;
    Ok(rep.map(|m| m.to_vec()))
}

/// Exhaustive enumeration, for cross-checking on small inputs.
#[pyfunction]
fn brute_force(denoms: &Bound<'_, PyAny>, target: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<u64>>> {
    let reps = ::ufrac::brute_force_oracle(&denoms_arg(denoms)?, &target_arg(target)?)
        .map_err(to_py_err)?;
    Ok(lists(&reps))
}

#[pyfunction]
fn reciprocal_sum(denoms: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(::ufrac::reciprocal_sum(&denoms_arg(denoms)?).to_string())
}

/// Greatest prime power dividing the denominator of `q`, as `(p, t)`.
#[pyfunction]
fn greatest_prime_power(q: &Bound<'_, PyAny>) -> PyResult<Option<(String, u32)>> {
    Ok(::ufrac::greatest_prime_power(&target_arg(q)?)
        .map(|g| (g.prime().to_string(), g.exponent())))
}

#[pyfunction]
fn mod_inverse(a: i64, p: u64) -> PyResult<u64> {
    ::ufrac::mod_inverse(a, p).map_err(to_py_err)
}

/// `(G, witnesses)` for the smallest `n` in `[n_start, n_max]` such that
/// `{1..n}` represents `target`, or `None`.
#[pyfunction]
#[pyo3(signature = (target, n_start = 1, n_max = 100_000, all_witnesses = true))]
fn compute_g(
    py: Python<'_>,
    target: &Bound<'_, PyAny>,
    n_start: u64,
    n_max: u64,
    all_witnesses: bool,
) -> PyResult<Option<(u64, Vec<Vec<u64>>)>> {
    let r = target_arg(target)?;
    let g = py
        .detach(move || apps::compute_g(&r, n_start, n_max, all_witnesses))
        .map_err(to_py_err)?;
    Ok(g.map(|g| (g.g, lists(&g.witnesses))))
}

/// Rows `(d, c, witness)` for each `d` in `[d_lo, d_hi]`; `c` and `witness`
/// are `None` when no witness was found within the limits.
#[pyfunction]
#[pyo3(signature = (d_lo, d_hi, c_max = 1000, bounds = vec![100], candidates = 10))]
fn conjecture(
    py: Python<'_>,
    d_lo: u64,
    d_hi: u64,
    c_max: u64,
    bounds: Vec<u64>,
    candidates: usize,
) -> PyResult<Vec<(u64, Option<u64>, Option<Vec<u64>>)>> {
    let config = ConjectureConfig {
        c_max,
        bounds,
        candidates,
    };
    let rows = py
        .detach(move || apps::verify_conjecture_range(d_lo, d_hi, &config))
        .map_err(to_py_err)?;
    Ok(rows
        .into_iter()
        .map(|row| match row.outcome {
            ConjectureOutcome::Found { c, witness, .. } => (row.d, Some(c), Some(witness.to_vec())),
            ConjectureOutcome::Failed => (row.d, None, None),
        })
        .collect())
}

#[pymodule]
fn ufrac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Multiset>()?;
    m.add_class::<Branch>()?;
    m.add_function(wrap_pyfunction!(solve_all, m)?)?;
    m.add_function(wrap_pyfunction!(ufrac_first, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(reciprocal_sum, m)?)?;
    m.add_function(wrap_pyfunction!(greatest_prime_power, m)?)?;
    m.add_function(wrap_pyfunction!(mod_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(compute_g, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture, m)?)?;
    Ok(())
}
