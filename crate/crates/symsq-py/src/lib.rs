//! Python bindings. Structured results cross the boundary as JSON strings
//! so the Python side can use `json.loads` and get plain dicts.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use serde::Serialize;

use symsq::characters::DirichletCharacter;
use symsq::eigendata::{load_eigendata, NewformData};
use symsq::exact::q_frac;
use symsq::padic::{PadicNumber, PrecisionBudget};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: Serialize>(x: &T) -> PyResult<String> {
    serde_json::to_string(x).map_err(err)
}

#[pyclass(name = "Character", frozen)]
struct PyCharacter {
    inner: DirichletCharacter,
}

#[pymethods]
impl PyCharacter {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(PyCharacter {
            inner: DirichletCharacter::parse_spec(spec).map_err(err)?,
        })
    }

    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    fn conductor(&self) -> u64 {
        self.inner.conductor()
    }

    fn parity(&self) -> u32 {
        self.inner.parity()
    }

    fn is_primitive(&self) -> bool {
        self.inner.is_primitive()
    }

    /// Complex value χ(a) as a (re, im) pair.
    fn value(&self, a: i64) -> (f64, f64) {
        let z = self.inner.value_complex(a);
        (z.re, z.im)
    }

    /// Exact value χ(a) as a cyclotomic expression.
    fn exact_value(&self, a: i64) -> String {
        self.inner.value(a).to_string()
    }

    fn __mul__(&self, o: &PyCharacter) -> PyCharacter {
        PyCharacter {
            inner: self.inner.mul(&o.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!("Character('{}')", self.inner.spec_string())
    }
}

#[pyclass(name = "Padic", frozen)]
struct PyPadic {
    inner: PadicNumber,
}

#[pymethods]
impl PyPadic {
    #[new]
    #[pyo3(signature = (num, p, prec, den = 1))]
    fn new(num: i64, p: u64, prec: i64, den: i64) -> PyResult<Self> {
        if den == 0 {
            return Err(PyZeroDivisionError::new_err("zero denominator"));
        }
        symsq::padic::check_prime(p).map_err(err)?;
        Ok(PyPadic {
            inner: PadicNumber::from_rational(&q_frac(num, den), p, prec),
        })
    }

    fn valuation(&self) -> i64 {
        self.inner.valuation()
    }

    fn precision(&self) -> i64 {
        self.inner.precision()
    }

    fn digits(&self) -> Vec<u64> {
        self.inner.digits()
    }

    fn agrees(&self, o: &PyPadic, k: i64) -> bool {
        self.inner.agrees(&o.inner, k)
    }

    fn __add__(&self, o: &PyPadic) -> PyPadic {
        PyPadic {
            inner: self.inner.add(&o.inner),
        }
    }

    fn __sub__(&self, o: &PyPadic) -> PyPadic {
        PyPadic {
            inner: self.inner.sub(&o.inner),
        }
    }

    fn __mul__(&self, o: &PyPadic) -> PyPadic {
        PyPadic {
            inner: self.inner.mul(&o.inner),
        }
    }

    fn __truediv__(&self, o: &PyPadic) -> PyResult<PyPadic> {
        Ok(PyPadic {
            inner: self
                .inner
                .div(&o.inner)
                .map_err(|e| PyZeroDivisionError::new_err(e.to_string()))?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Padic({})", self.inner)
    }
}

#[pyclass(name = "Newform", frozen)]
struct PyNewform {
    inner: NewformData,
}

#[pymethods]
impl PyNewform {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyNewform {
            inner: load_eigendata(&path).map_err(err)?,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    #[getter]
    fn level(&self) -> u64 {
        self.inner.level
    }

    #[getter]
    fn weight(&self) -> u32 {
        self.inner.weight
    }

    fn bad_primes(&self) -> Vec<u64> {
        self.inner.bad_primes()
    }

    fn ap(&self, p: u64) -> PyResult<String> {
        Ok(self.inner.ap(p).map_err(err)?.to_string())
    }

    /// First index where the Rankin identity fails, or None.
    fn rankin_check(&self, chi: &PyCharacter, bound: u64) -> PyResult<Option<u64>> {
        Ok(symsq::qexpansion::rankin_check(&self.inner, &chi.inner, bound)
            .map_err(err)?
            .first_discrepancy)
    }

    /// Euler-product route compared with the λ(T(n²)) route; None when they agree.
    fn route_difference(&self, chi: &PyCharacter, bound: u64) -> PyResult<Option<u64>> {
        let a = symsq::lfun::sym2_imprimitive_series(&self.inner, &chi.inner, bound).map_err(err)?;
        let b = symsq::lfun::route_b(&self.inner, &chi.inner, bound).map_err(err)?;
        Ok(a.first_difference(&b))
    }

    /// Completed L-value at s = re + i·im: (re, im, error bound).
    fn completed_l(&self, chi: &PyCharacter, re: f64, im: f64) -> PyResult<(f64, f64, f64)> {
        let v = symsq::lfun::completed_l(&self.inner, &chi.inner, Complex64::new(re, im)).map_err(err)?;
        Ok((v.re, v.im, v.error_bound))
    }

    #[pyo3(signature = (p, digits = 20))]
    fn trivial_zero_json(&self, p: u64, digits: u32) -> PyResult<String> {
        let pt = symsq::trivial_zero::TwistPoint::new(self.inner.m() as i64, DirichletCharacter::trivial(1));
        let r = symsq::trivial_zero::trivial_zero_report(&self.inner, &pt, p, &PrecisionBudget::new(digits, 20, 53))
            .map_err(err)?;
        to_json(&r)
    }

    #[pyo3(signature = (p, digits = 30))]
    fn l_invariant_json(&self, p: u64, digits: u32) -> PyResult<String> {
        let r = symsq::trivial_zero::l_invariant_report(&self.inner, p, &PrecisionBudget::new(digits, 20, 53))
            .map_err(err)?;
        to_json(&r)
    }
}

/// Kubota–Leopoldt series as JSON, with the values at n = 0..4 appended.
#[pyfunction]
#[pyo3(signature = (chi, p, branch = 1, digits = 20, terms = 20))]
fn kubota_leopoldt_json(chi: &PyCharacter, p: u64, branch: i64, digits: u32, terms: usize) -> PyResult<String> {
    let kl = symsq::iwasawa::kubota_leopoldt(&chi.inner, branch, p, &PrecisionBudget::new(digits, terms, 53))
        .map_err(err)?;
    let values: Vec<String> = (0..=4)
        .map(|n| kl.interpolated_value(n).map(|v| v.to_string()))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    to_json(&serde_json::json!({"series": kl.series.dump(), "values": values}))
}

#[pyfunction]
fn hecke_fe_residual(chi: &PyCharacter, re: f64, im: f64) -> PyResult<f64> {
    symsq::lfun::hecke_fe_residual(&chi.inner, Complex64::new(re, im)).map_err(err)
}

#[pyfunction]
fn base_change_holds(n: u64, f: u64) -> PyResult<bool> {
    Ok(symsq::trivial_zero::base_change_order(n, f).map_err(err)?.holds)
}

/// Runs the command line in-process: returns (exit code, stdout, stderr).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let code = symsq::cli::run_with(std::iter::once("symsq".to_string()).chain(args), &mut out, &mut errs);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&errs).into_owned(),
    )
}

#[pymodule]
fn symsq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCharacter>()?;
    m.add_class::<PyPadic>()?;
    m.add_class::<PyNewform>()?;
    m.add_function(wrap_pyfunction!(kubota_leopoldt_json, m)?)?;
    m.add_function(wrap_pyfunction!(hecke_fe_residual, m)?)?;
    m.add_function(wrap_pyfunction!(base_change_holds, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
