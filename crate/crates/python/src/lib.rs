//! Python bindings for `bintab-core`.
//!
//! Exact values cross the boundary as `"num/den"` strings; decimal views are
//! plain floats. Methods take 0-based axes, while dictionary keys use the
//! 1-based pair labels (`"12"`, `"13"`, ...) printed by the command line tool.

use std::collections::BTreeMap;

use bintab_core::baselines::{ipf_max_entropy, DEFAULT_MAX_ITER};
use bintab_core::constraints::{
    build_h, moment_from_odds_ratio as core_moment, targets_from_pmf, MarginMode, MarginTargets,
    DEFAULT_DIGITS,
};
use bintab_core::datasets::Dataset;
use bintab_core::geometry::{
    decompose, enumerate_vertices, mixture, polytope_dimension, MixtureWeights,
    VertexSet as CoreVertexSet,
};
use bintab_core::loglinear::{corner_params, zero_mean_params, LogLinearParams, DEFAULT_EPS};
use bintab_core::numeric::{
    format_rational, parse_rational, rational_to_f64, rationalize, Rational,
};
use bintab_core::sampling::{
    sample_dirichlet, sample_hit_and_run, SamplerConfig, DEFAULT_BURN_IN, DEFAULT_THINNING,
};
use bintab_core::table::{ExactPmf, FloatPmf, Pmf};
use bintab_core::Error;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pyo3::create_exception!(
    bintab,
    InfeasibleError,
    PyValueError,
    "The prescribed margins and moments admit no table."
);

/// Slack allowed in the total of probability input before exact renormalization.
const MASS_TOL: f64 = 1e-9;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::EmptyFeasibleSet { .. }
        | Error::InfeasibleTargets(_)
        | Error::NotInPolytope { .. }
        | Error::InfeasibleStart { .. }
        | Error::EmptyVertexSet => InfeasibleError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn pair_key(i: usize, j: usize) -> String {
    format!("{}{}", i + 1, j + 1)
}

fn exact_strings(p: &ExactPmf) -> Vec<String> {
    p.cells().iter().map(format_rational).collect()
}

/// Accepts ints, floats or `"num/den"` strings.
fn to_rational(x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(s) = x.extract::<String>() {
        return parse_rational(&s).map_err(py_err);
    }
    if let Ok(n) = x.extract::<i64>() {
        return Ok(Rational::from_integer(n.into()));
    }
    let f: f64 = x.extract()?;
    rationalize(f).map_err(py_err)
}

fn parse_mode(margins: &str) -> PyResult<MarginMode> {
    margins.parse().map_err(py_err)
}

fn params_dict(p: &LogLinearParams) -> BTreeMap<String, f64> {
    p.labelled().into_iter().collect()
}

/// A joint pmf of `d` binary variables, stored exactly.
#[pyclass(module = "bintab", skip_from_py_object)]
#[derive(Clone)]
struct Table {
    pmf: ExactPmf,
}

#[pymethods]
impl Table {
    /// Cells in lexicographic order with the first variable most significant.
    /// Counts are normalized; probabilities must sum to one within 1e-9.
    #[new]
    fn new(cells: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let values = cells
            .iter()
            .map(to_rational)
            .collect::<PyResult<Vec<_>>>()?;
        let n = values.len();
        if n < 4 || !n.is_power_of_two() {
            return Err(PyValueError::new_err(format!(
                "need 2^d cells with d >= 2, got {n}"
            )));
        }
        let d = n.trailing_zeros() as usize;
        if !values.iter().all(Rational::is_integer) {
            let total: f64 = values.iter().map(rational_to_f64).sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(PyValueError::new_err(format!(
                    "probabilities sum to {total}, not 1"
                )));
            }
        }
        Ok(Table {
            pmf: Pmf::normalized(d, values).map_err(py_err)?,
        })
    }

    /// One of `example1`, `water`, `raters`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let ds: Dataset = name.parse().map_err(py_err)?;
        Ok(Table { pmf: ds.pmf() })
    }

    #[getter]
    fn d(&self) -> usize {
        self.pmf.dim()
    }

    #[getter]
    fn cells(&self) -> Vec<String> {
        exact_strings(&self.pmf)
    }

    fn floats(&self) -> Vec<f64> {
        self.pmf.to_f64().into_cells()
    }

    fn odds_ratio(&self, i: usize, j: usize) -> PyResult<f64> {
        Ok(self.pmf.marginal_odds_ratio(i, j).map_err(py_err)?.to_f64())
    }

    fn correlation(&self, i: usize, j: usize) -> PyResult<f64> {
        self.pmf.correlation(i, j).map_err(py_err)
    }

    fn top_order_odds_ratio(&self) -> f64 {
        self.pmf.top_order_odds_ratio().to_f64()
    }

    fn reflect(&self) -> Self {
        Table {
            pmf: self.pmf.reflect(),
        }
    }

    /// Margin and moment targets, with moments taken from the marginal odds ratios.
    #[pyo3(signature = (digits = DEFAULT_DIGITS, margins = "uniform"))]
    fn targets(&self, digits: u32, margins: &str) -> PyResult<Targets> {
        let t = targets_from_pmf(&self.pmf, digits, parse_mode(margins)?).map_err(py_err)?;
        Ok(Targets { inner: t })
    }

    #[pyo3(signature = (eps = DEFAULT_EPS))]
    fn zero_mean_params(&self, eps: f64) -> PyResult<BTreeMap<String, f64>> {
        Ok(params_dict(
            &zero_mean_params(&self.pmf, eps).map_err(py_err)?,
        ))
    }

    #[pyo3(signature = (eps = DEFAULT_EPS))]
    fn corner_params(&self, eps: f64) -> PyResult<BTreeMap<String, f64>> {
        Ok(params_dict(&corner_params(&self.pmf, eps).map_err(py_err)?))
    }

    fn __len__(&self) -> usize {
        self.pmf.cells().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Table(d={}, cells={:?})",
            self.pmf.dim(),
            exact_strings(&self.pmf)
        )
    }
}

/// Prescribed univariate margins and second-order moments.
#[pyclass(module = "bintab", skip_from_py_object)]
#[derive(Clone)]
struct Targets {
    inner: MarginTargets,
}

#[pymethods]
impl Targets {
    /// `univariate[i] = P(X_i = 1)`; `moments` maps pair labels like `"12"` to `P(X_i = 1, X_j = 1)`.
    #[new]
    fn new(
        univariate: Vec<Bound<'_, PyAny>>,
        moments: BTreeMap<String, Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let uni = univariate
            .iter()
            .map(to_rational)
            .collect::<PyResult<Vec<_>>>()?;
        let mut m = BTreeMap::new();
        for (key, v) in &moments {
            let axes: Vec<usize> = key
                .chars()
                .filter_map(|c| c.to_digit(10))
                .map(|x| x as usize)
                .collect();
            let [i, j] = axes[..] else {
                return Err(PyValueError::new_err(format!(
                    "moment key {key:?} must name two variables"
                )));
            };
            if i == 0 || j == 0 {
                return Err(PyValueError::new_err(format!(
                    "moment key {key:?} uses 1-based labels"
                )));
            }
            m.insert((i - 1, j - 1), to_rational(v)?);
        }
        Ok(Targets {
            inner: MarginTargets::new(uni, m).map_err(py_err)?,
        })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn univariate(&self) -> Vec<String> {
        self.inner
            .univariate()
            .iter()
            .map(format_rational)
            .collect()
    }

    #[getter]
    fn moments(&self) -> BTreeMap<String, String> {
        self.inner
            .moments()
            .map(|((i, j), m)| (pair_key(i, j), format_rational(m)))
            .collect()
    }

    /// Rows of H, with `H p = 0` on the feasible set.
    fn constraint_matrix(&self) -> Vec<Vec<String>> {
        build_h(&self.inner)
            .rows()
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect()
    }

    fn dimension(&self) -> PyResult<usize> {
        polytope_dimension(&build_h(&self.inner)).map_err(py_err)
    }

    /// Exact vertex enumeration of the feasible polytope.
    fn vertices(&self, py: Python<'_>) -> PyResult<VertexSet> {
        let h = build_h(&self.inner);
        let set = py.detach(|| enumerate_vertices(&h)).map_err(py_err)?;
        Ok(VertexSet { inner: set })
    }

    /// Maximum-entropy table; returns `cells`, `iterations`, `final_residual`, `converged`.
    #[pyo3(signature = (tol = 1e-10, max_iter = DEFAULT_MAX_ITER))]
    fn ipf<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
        max_iter: usize,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let r = ipf_max_entropy(&self.inner, tol, max_iter).map_err(py_err)?;
        let out = pyo3::types::PyDict::new(py);
        out.set_item("cells", r.table.cells().to_vec())?;
        out.set_item("iterations", r.iterations)?;
        out.set_item("final_residual", r.final_residual)?;
        out.set_item("converged", r.converged)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Targets(univariate={:?}, moments={:?})",
            self.univariate(),
            self.moments()
        )
    }
}

/// Vertices of a feasible polytope, as exact pmfs.
#[pyclass(module = "bintab")]
struct VertexSet {
    inner: CoreVertexSet,
}

impl VertexSet {
    fn centroid(&self) -> PyResult<ExactPmf> {
        let n = self.inner.len();
        if n == 0 {
            return Err(py_err(Error::EmptyVertexSet));
        }
        let w = MixtureWeights::new(vec![Rational::new(1.into(), n.into()); n]).map_err(py_err)?;
        mixture(&w, &self.inner).map_err(py_err)
    }
}

#[pymethods]
impl VertexSet {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn vertices(&self) -> Vec<Vec<String>> {
        self.inner.vertices().iter().map(exact_strings).collect()
    }

    fn floats(&self) -> Vec<Vec<f64>> {
        self.inner
            .to_f64()
            .into_iter()
            .map(FloatPmf::into_cells)
            .collect()
    }

    fn is_reflection_closed(&self) -> bool {
        self.inner.is_reflection_closed()
    }

    fn max_support(&self) -> usize {
        self.inner.max_support()
    }

    /// `sum_i theta_i r_i` for convex weights `theta`.
    fn mixture(&self, weights: Vec<f64>) -> PyResult<Vec<f64>> {
        let w = MixtureWeights::new(weights).map_err(py_err)?;
        Ok(mixture(&w, &self.inner).map_err(py_err)?.into_cells())
    }

    /// Convex weights reproducing `table`; raises `InfeasibleError` outside the polytope.
    #[pyo3(signature = (table, tol = 1e-10))]
    fn decompose(&self, table: &Table, tol: f64) -> PyResult<Vec<f64>> {
        Ok(decompose(&table.pmf, &self.inner, tol)
            .map_err(py_err)?
            .theta()
            .to_vec())
    }

    /// Uniform-Dirichlet mixtures of the vertices.
    #[pyo3(signature = (count, seed = 0))]
    fn sample_dirichlet(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let draws =
            sample_dirichlet(&self.inner, &SamplerConfig::new(seed, count)).map_err(py_err)?;
        Ok(draws.into_iter().map(FloatPmf::into_cells).collect())
    }

    /// Hit-and-run draws started at the vertex centroid.
    #[pyo3(signature = (count, seed = 0, burn_in = DEFAULT_BURN_IN, thinning = DEFAULT_THINNING))]
    fn sample_hit_and_run(
        &self,
        count: usize,
        seed: u64,
        burn_in: usize,
        thinning: usize,
    ) -> PyResult<Vec<Vec<f64>>> {
        let cfg = SamplerConfig {
            seed,
            count,
            burn_in,
            thinning,
        };
        let draws = sample_hit_and_run(self.inner.constraints(), &self.centroid()?, &cfg)
            .map_err(py_err)?;
        Ok(draws.into_iter().map(FloatPmf::into_cells).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "VertexSet(len={}, d={})",
            self.inner.len(),
            self.inner.constraints().dim()
        )
    }
}

/// Second-order moment under uniform margins matching odds ratio `omega`, rounded to `digits`.
#[pyfunction]
#[pyo3(signature = (omega, digits = DEFAULT_DIGITS))]
fn moment_from_odds_ratio(omega: f64, digits: u32) -> PyResult<String> {
    Ok(format_rational(
        &core_moment(omega, digits).map_err(py_err)?,
    ))
}

#[pymodule]
fn bintab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Table>()?;
    m.add_class::<Targets>()?;
    m.add_class::<VertexSet>()?;
    m.add_function(wrap_pyfunction!(moment_from_odds_ratio, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    Ok(())
}
