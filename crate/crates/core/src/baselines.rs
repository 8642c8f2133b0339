//! Exact-gradient reference methods with step `1/L`.
//!
//! Rows use `alpha = 1/L` and `A = k/L` so traces share the solver's schema.

use crate::error::{check_dim, Error, Result};
use crate::oracles::dense_bits;
use crate::problems::Problem;
use crate::prox::FeasibleSet;
use crate::solver::{Trace, TraceRecord, TraceSink};
use crate::vec::DenseVec;

struct Meter {
    step: f64,
    evals_per_step: u64,
    bits_per_step: u64,
}

impl Meter {
    fn new(problem: &dyn Problem) -> Result<Self> {
        let l = problem.smoothness();
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!(
                "smoothness must be positive, got {l}"
            )));
        }
        let m = problem.num_components();
        Ok(Meter {
            step: 1.0 / l,
            evals_per_step: m as u64,
            bits_per_step: dense_bits(problem.dim(), m),
        })
    }

    fn row(&self, problem: &dyn Problem, k: usize, y: &DenseVec) -> Result<TraceRecord> {
        let value = problem.value(y)?;
        if !value.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite {
                iteration: k,
                what: "iterate",
            });
        }
        Ok(TraceRecord {
            k,
            value,
            a: k as f64 * self.step,
            alpha: if k == 0 { 0.0 } else { self.step },
            grad_evals: k as u64 * self.evals_per_step,
            bits: k as u64 * self.bits_per_step,
        })
    }
}

/// Projected gradient descent `y_{k+1} = P_C(y_k - grad f(y_k) / L)`.
pub fn run_gradient_descent_into(
    problem: &dyn Problem,
    set: &FeasibleSet,
    x0: &DenseVec,
    steps: usize,
    sink: &mut dyn TraceSink,
) -> Result<DenseVec> {
    check_dim(problem.dim(), set.dim())?;
    let meter = Meter::new(problem)?;
    let mut y = set.project(x0)?;
    sink.record(&meter.row(problem, 0, &y)?)?;
    for k in 1..=steps {
        let g = problem.gradient(&y)?;
        y = set.project(&DenseVec::axpy(-meter.step, &g, &y)?)?;
        sink.record(&meter.row(problem, k, &y)?)?;
    }
    Ok(y)
}

pub fn run_gradient_descent(
    problem: &dyn Problem,
    set: &FeasibleSet,
    x0: &DenseVec,
    steps: usize,
) -> Result<Trace> {
    let mut trace = Trace::new();
    run_gradient_descent_into(problem, set, x0, steps, &mut trace)?;
    Ok(trace)
}

/// Nesterov's 1983 method:
/// `y_k = x_k - grad f(x_k) / L`,
/// `x_{k+1} = y_k + ((t_k - 1) / t_{k+1}) (y_k - y_{k-1})`,
/// `t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2`, `t_0 = 1`.
pub fn run_nesterov83_into(
    problem: &dyn Problem,
    set: &FeasibleSet,
    x0: &DenseVec,
    steps: usize,
    sink: &mut dyn TraceSink,
) -> Result<DenseVec> {
    if !set.is_unconstrained() {
        return Err(Error::Unsupported(
            "nesterov83 runs only on unconstrained problems".into(),
        ));
    }
    check_dim(problem.dim(), set.dim())?;
    check_dim(problem.dim(), x0.dim())?;
    let meter = Meter::new(problem)?;
    let mut x = x0.clone();
    let mut y_prev = x0.clone();
    let mut t = 1.0f64;
    sink.record(&meter.row(problem, 0, &y_prev)?)?;
    for k in 1..=steps {
        let y = DenseVec::axpy(-meter.step, &problem.gradient(&x)?, &x)?;
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        x = DenseVec::axpy(momentum, &y.sub(&y_prev)?, &y)?;
        sink.record(&meter.row(problem, k, &y)?)?;
        y_prev = y;
        t = t_next;
    }
    Ok(y_prev)
}

pub fn run_nesterov83(
    problem: &dyn Problem,
    set: &FeasibleSet,
    x0: &DenseVec,
    steps: usize,
) -> Result<Trace> {
    let mut trace = Trace::new();
    run_nesterov83_into(problem, set, x0, steps, &mut trace)?;
    Ok(trace)
}
