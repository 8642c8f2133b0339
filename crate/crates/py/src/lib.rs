//! Python bindings. Vectors cross the boundary as lists of floats.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use stochastic_accel::harness::{
    compute_reference_optimum_with, run_experiment as run_sweep, ExperimentConfig, OracleSpec,
    ReferenceOptions, RunOptions,
};
use stochastic_accel::oracles::{self, saga_lambda_bound as saga_bound, Codec};
use stochastic_accel::problems::{self, libsvm, LeastSquares, Logistic};
use stochastic_accel::rng::seeded;
use stochastic_accel::{DenseVec, Error, FeasibleSet, ProxFunction, TraceRecord};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for stochastic_accel::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// An objective `f = sum_l f_l`.
#[pyclass(frozen, module = "stochastic_accel")]
pub struct Problem {
    inner: Box<dyn problems::Problem>,
}

impl Problem {
    pub fn as_dyn(&self) -> &dyn problems::Problem {
        self.inner.as_ref()
    }
}

#[pymethods]
impl Problem {
    #[staticmethod]
    pub fn least_squares(a: Vec<Vec<f64>>, b: Vec<f64>) -> PyResult<Self> {
        let rows = a.into_iter().map(DenseVec::new).collect();
        let p = LeastSquares::new(rows, DenseVec::new(b)).py()?;
        Ok(Problem { inner: Box::new(p) })
    }

    #[staticmethod]
    #[pyo3(signature = (rows, cols, seed = 0))]
    pub fn random_least_squares(rows: usize, cols: usize, seed: u64) -> PyResult<Self> {
        let p = problems::random_least_squares(rows, cols, seed).py()?;
        Ok(Problem { inner: Box::new(p) })
    }

    #[staticmethod]
    #[pyo3(signature = (path, reg, components, normalize = false))]
    pub fn logistic_from_file(
        path: &str,
        reg: f64,
        components: usize,
        normalize: bool,
    ) -> PyResult<Self> {
        let mut data = libsvm::read_libsvm_file(path).py()?;
        if normalize {
            data.normalize_rows();
        }
        let p = Logistic::new(data, reg, components).py()?;
        Ok(Problem { inner: Box::new(p) })
    }

    #[staticmethod]
    #[pyo3(signature = (samples, dim, seed, reg, components))]
    pub fn synthetic_logistic(
        samples: usize,
        dim: usize,
        seed: u64,
        reg: f64,
        components: usize,
    ) -> PyResult<Self> {
        let data = problems::synthetic_logistic_dataset(samples, dim, seed);
        let p = Logistic::new(data, reg, components).py()?;
        Ok(Problem { inner: Box::new(p) })
    }

    #[getter]
    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    pub fn num_components(&self) -> usize {
        self.inner.num_components()
    }

    #[getter]
    pub fn smoothness(&self) -> f64 {
        self.inner.smoothness()
    }

    #[getter]
    pub fn strong_convexity(&self) -> f64 {
        self.inner.strong_convexity()
    }

    pub fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&DenseVec::new(x)).py()
    }

    pub fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradient(&DenseVec::new(x)).py()?.into_vec())
    }

    pub fn component_gradient(&self, component: usize, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .inner
            .component_gradient(component, &DenseVec::new(x))
            .py()?
            .into_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(dim={}, components={}, L={:e}, mu={:e})",
            self.inner.dim(),
            self.inner.num_components(),
            self.inner.smoothness(),
            self.inner.strong_convexity()
        )
    }
}

/// Weight recursion state `(k, A_{k-1}, alpha_k, A_k)`.
#[pyclass(skip_from_py_object, module = "stochastic_accel")]
#[derive(Clone)]
pub struct WeightState {
    inner: stochastic_accel::WeightState,
}

#[pymethods]
impl WeightState {
    #[new]
    pub fn new(smoothness: f64, mu: f64, sigma: f64, lam: f64) -> PyResult<Self> {
        Ok(WeightState {
            inner: stochastic_accel::WeightState::new(smoothness, mu, sigma, lam).py()?,
        })
    }

    /// Advances one iteration in place.
    pub fn advance(&mut self) {
        self.inner.advance();
    }

    #[getter]
    pub fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    pub fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    pub fn a_prev(&self) -> f64 {
        self.inner.a_prev
    }

    #[getter]
    pub fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    pub fn identity_residual(&self) -> f64 {
        self.inner.identity_residual()
    }
}

#[pyclass(frozen, get_all, skip_from_py_object, module = "stochastic_accel")]
#[derive(Clone, Copy)]
pub struct TraceRow {
    pub k: usize,
    pub value: f64,
    pub a: f64,
    pub alpha: f64,
    pub grad_evals: u64,
    pub bits: u64,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        TraceRow {
            k: r.k,
            value: r.value,
            a: r.a,
            alpha: r.alpha,
            grad_evals: r.grad_evals,
            bits: r.bits,
        }
    }
}

#[pymethods]
impl TraceRow {
    fn __repr__(&self) -> String {
        format!(
            "TraceRow(k={}, value={:e}, a={:e}, alpha={:e}, grad_evals={}, bits={})",
            self.k, self.value, self.a, self.alpha, self.grad_evals, self.bits
        )
    }
}

/// Parses an oracle description such as `{"kind": "saga", "batch": 10}`.
pub fn parse_oracle(json: &str) -> PyResult<OracleSpec> {
    serde_json::from_str(json).map_err(|e| PyValueError::new_err(format!("oracle spec: {e}")))
}

/// Algorithm 1 over a ball, box or the whole space.
#[pyclass(frozen, module = "stochastic_accel")]
pub struct AcceleratedMethod {
    lam: f64,
    sigma: f64,
    radius: Option<f64>,
    bounds: Option<(f64, f64)>,
    mu: Option<f64>,
}

impl AcceleratedMethod {
    fn build(&self, dim: usize) -> PyResult<stochastic_accel::AcceleratedMethod> {
        let set = match (self.radius, self.bounds) {
            (Some(_), Some(_)) => {
                return Err(PyValueError::new_err("give radius or bounds, not both"))
            }
            (Some(r), None) => FeasibleSet::ball(DenseVec::zeros(dim), r).py()?,
            (None, Some((lo, hi))) => {
                FeasibleSet::boxed(DenseVec::new(vec![lo; dim]), DenseVec::new(vec![hi; dim]))
                    .py()?
            }
            (None, None) => FeasibleSet::unconstrained(dim),
        };
        let prox = ProxFunction::new(DenseVec::zeros(dim), self.sigma).py()?;
        let m = stochastic_accel::AcceleratedMethod::new(set, prox, self.lam).py()?;
        Ok(match self.mu {
            Some(mu) => m.with_strong_convexity(mu),
            None => m,
        })
    }
}

#[pymethods]
impl AcceleratedMethod {
    #[new]
    #[pyo3(signature = (lam = 1.0, sigma = 1.0, radius = None, bounds = None, mu = None))]
    pub fn new(
        lam: f64,
        sigma: f64,
        radius: Option<f64>,
        bounds: Option<(f64, f64)>,
        mu: Option<f64>,
    ) -> Self {
        AcceleratedMethod {
            lam,
            sigma,
            radius,
            bounds,
            mu,
        }
    }

    #[getter]
    pub fn lam(&self) -> f64 {
        self.lam
    }

    /// Runs `max_iters` iterations and returns one row per iteration, `k = 0` included.
    #[pyo3(signature = (problem, max_iters, oracle = "{\"kind\": \"exact\"}", seed = 0, variance = 0.0))]
    pub fn run(
        &self,
        py: Python<'_>,
        problem: &Problem,
        max_iters: usize,
        oracle: &str,
        seed: u64,
        variance: f64,
    ) -> PyResult<Vec<TraceRow>> {
        let spec = parse_oracle(oracle)?;
        let method = self.build(problem.inner.dim())?;
        let mut orc = spec.build(variance, seed).py()?;
        let stop = stochastic_accel::StoppingRule::iterations(max_iters);
        let p = problem.as_dyn();
        let trace = py.detach(|| method.run(p, orc.as_mut(), &stop)).py()?;
        Ok(trace.iter().map(TraceRow::from).collect())
    }
}

/// Runs a JSON experiment config and returns `(f_star, csv_text)`.
#[pyfunction]
#[pyo3(signature = (config, normalize_rows = false, base_dir = None))]
pub fn run_experiment(
    py: Python<'_>,
    config: &str,
    normalize_rows: bool,
    base_dir: Option<std::path::PathBuf>,
) -> PyResult<(f64, String)> {
    let mut cfg = ExperimentConfig::from_json(config).py()?;
    cfg.base_dir = base_dir;
    let opts = RunOptions {
        normalize_rows,
        f_star: None,
    };
    let res = py.detach(|| run_sweep(&cfg, opts)).py()?;
    Ok((res.f_star, res.to_csv_string()))
}

/// `(f_star, y_star, iterations)` from a long exact run.
#[pyfunction]
#[pyo3(signature = (problem, mu = None, max_iters = 1_000_000))]
pub fn reference_optimum(
    problem: &Problem,
    mu: Option<f64>,
    max_iters: usize,
) -> PyResult<(f64, Vec<f64>, usize)> {
    let p = problem.as_dyn();
    let opts = ReferenceOptions {
        max_iters,
        prox: None,
        mu,
    };
    let r = compute_reference_optimum_with(p, &FeasibleSet::unconstrained(p.dim()), &opts).py()?;
    Ok((r.f_star, r.y_star.into_vec(), r.iterations))
}

/// Compresses `grad` with a codec given as JSON; returns `(output, bits)`.
#[pyfunction]
#[pyo3(signature = (grad, codec, seed = 0))]
pub fn compress(grad: Vec<f64>, codec: &str, seed: u64) -> PyResult<(Vec<f64>, u64)> {
    let codec: Codec =
        serde_json::from_str(codec).map_err(|e| PyValueError::new_err(format!("codec: {e}")))?;
    let g = DenseVec::new(grad);
    codec.validate(g.dim()).py()?;
    let mut rng = seeded(seed);
    let out = codec.compress(&g, &mut rng).py()?;
    Ok((out.into_vec(), codec.bits(g.dim())))
}

#[pyfunction]
#[pyo3(signature = (grad, keep, seed = 0))]
pub fn sparsify(grad: Vec<f64>, keep: usize, seed: u64) -> PyResult<(Vec<f64>, u64)> {
    let out = oracles::sparsify(&DenseVec::new(grad), keep, &mut seeded(seed)).py()?;
    Ok((out.grad_estimate.into_vec(), out.bits))
}

#[pyfunction]
#[pyo3(signature = (grad, levels, seed = 0))]
pub fn dither(grad: Vec<f64>, levels: u32, seed: u64) -> PyResult<(Vec<f64>, u64)> {
    let out = oracles::dither(&DenseVec::new(grad), levels, &mut seeded(seed)).py()?;
    Ok((out.grad_estimate.into_vec(), out.bits))
}

#[pyfunction]
#[pyo3(signature = (grad, seed = 0))]
pub fn natural(grad: Vec<f64>, seed: u64) -> (Vec<f64>, u64) {
    let out = oracles::natural(&DenseVec::new(grad), &mut seeded(seed));
    (out.grad_estimate.into_vec(), out.bits)
}

/// The admissible `lambda` for SAGA with `m` components and batch `b`.
#[pyfunction]
pub fn saga_lambda_bound(m: usize, b: usize, smoothness: f64, mu: f64) -> PyResult<f64> {
    Ok(saga_bound(m, b, smoothness, mu).py()?.lambda)
}

/// Parses LIBSVM text; returns `(samples, dim)`.
#[pyfunction]
pub fn parse_libsvm(text: &str) -> PyResult<(usize, usize)> {
    let d = libsvm::parse_libsvm_str(text).py()?;
    Ok((d.len(), d.dim()))
}

#[pymodule]
fn stochastic_accel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<WeightState>()?;
    m.add_class::<TraceRow>()?;
    m.add_class::<AcceleratedMethod>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(reference_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(compress, m)?)?;
    m.add_function(wrap_pyfunction!(sparsify, m)?)?;
    m.add_function(wrap_pyfunction!(dither, m)?)?;
    m.add_function(wrap_pyfunction!(natural, m)?)?;
    m.add_function(wrap_pyfunction!(saga_lambda_bound, m)?)?;
    m.add_function(wrap_pyfunction!(parse_libsvm, m)?)?;
    Ok(())
}
