//! The accelerated dual-averaging method.
//!
//! Per iteration `k`:
//!
//! 1. advance the weights to `(alpha_k, A_k)`;
//! 2. pick the search point `x_k` from `y_{k-1}` and `v_{k-1}`;
//! 3. query the oracle at `x_k`;
//! 4. `s_k = s_{k-1} - alpha_k g_k`;
//! 5. `v_k` maximizes `<s_k, u> - phi(u) - (mu/2) sum_i alpha_i ||x_i - u||^2` over `C`;
//! 6. `y_k = (A_{k-1}/A_k) y_{k-1} + (alpha_k/A_k) v_k`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::oracles::Oracle;
use crate::problems::Problem;
use crate::prox::{solve_v, FeasibleSet, ProxAccumulator, ProxFunction};
use crate::vec::DenseVec;
use crate::weights::{validate_lambda, WeightState};

/// One row of a solver trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    /// `f(y_k)`
    pub value: f64,
    /// `A_k`
    pub a: f64,
    /// `alpha_k`
    pub alpha: f64,
    /// Cumulative component-gradient evaluations.
    pub grad_evals: u64,
    /// Cumulative bits.
    pub bits: u64,
}

pub type Trace = Vec<TraceRecord>;

/// Receives trace rows as they are produced.
pub trait TraceSink {
    fn record(&mut self, row: &TraceRecord) -> Result<()>;
}

impl TraceSink for Vec<TraceRecord> {
    fn record(&mut self, row: &TraceRecord) -> Result<()> {
        self.push(*row);
        Ok(())
    }
}

/// Adapts a closure into a [`TraceSink`].
pub struct FnSink<F>(pub F);

impl<F: FnMut(&TraceRecord) -> Result<()>> TraceSink for FnSink<F> {
    fn record(&mut self, row: &TraceRecord) -> Result<()> {
        (self.0)(row)
    }
}

/// When to stop iterating. All configured rules are combined with "or".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub max_iters: usize,
    /// Stop once `f(y_k) - f_star <= target`, as `(f_star, target)`.
    pub gap: Option<(f64, f64)>,
    /// Stop once cumulative component evaluations reach this budget.
    pub eval_budget: Option<u64>,
}

impl StoppingRule {
    pub fn iterations(max_iters: usize) -> Self {
        StoppingRule {
            max_iters,
            gap: None,
            eval_budget: None,
        }
    }

    pub fn with_gap(self, f_star: f64, target: f64) -> Self {
        StoppingRule {
            gap: Some((f_star, target)),
            ..self
        }
    }

    pub fn with_budget(self, budget: u64) -> Self {
        StoppingRule {
            eval_budget: Some(budget),
            ..self
        }
    }

    pub fn should_stop(&self, row: &TraceRecord) -> bool {
        row.k >= self.max_iters
            || self
                .gap
                .is_some_and(|(f_star, target)| row.value - f_star <= target)
            || self.eval_budget.is_some_and(|b| row.grad_evals >= b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub weights: WeightState,
    pub x: DenseVec,
    pub y: DenseVec,
    pub v: DenseVec,
    /// `-sum_i alpha_i g_i`
    pub s: DenseVec,
    pub prox_acc: ProxAccumulator,
    pub grad_evals: u64,
    pub bits: u64,
    /// The true weights are `weights.{a, a_prev, alpha, sigma}` times
    /// `2^weight_scale_log2`; see [`SolverState::renormalize`].
    pub weight_scale_log2: i32,
}

/// Weight totals above this are rescaled by `2^-RESCALE_LOG2`.
const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_LOG2: i32 = 500;

impl SolverState {
    pub fn k(&self) -> usize {
        self.weights.k
    }

    /// `A_k` in true (unscaled) units; `inf` once it exceeds `f64::MAX`.
    pub fn weight_total(&self) -> f64 {
        self.weights.a * 2f64.powi(self.weight_scale_log2)
    }

    /// Divides `A`, `alpha`, `sigma`, `s` and `sum alpha_i x_i` by the same
    /// power of two. Every quantity the iteration reads is a ratio of these,
    /// so iterates are unchanged while `mu A^2` stays representable.
    fn renormalize(&mut self) {
        let f = 2f64.powi(-RESCALE_LOG2);
        let w = &mut self.weights;
        w.a *= f;
        w.a_prev *= f;
        w.alpha *= f;
        w.sigma *= f;
        self.s = self.s.scaled(f);
        self.prox_acc.weighted_x_sum = self.prox_acc.weighted_x_sum.scaled(f);
        self.prox_acc.weight_total *= f;
        self.weight_scale_log2 += RESCALE_LOG2;
    }

    pub fn record(&self, problem: &dyn Problem) -> Result<TraceRecord> {
        Ok(TraceRecord {
            k: self.k(),
            value: problem.value(&self.y)?,
            a: self.weight_total(),
            alpha: self.weights.alpha * 2f64.powi(self.weight_scale_log2),
            grad_evals: self.grad_evals,
            bits: self.bits,
        })
    }
}

/// Search point
/// `x_k = ((mu A_k + sigma) A_{k-1} y_{k-1} + (mu A_{k-1} + sigma) alpha_k v_{k-1})
///        / (mu (A_k - alpha_k)(A_k + alpha_k) + sigma A_k)`
/// for weights already advanced to iteration `k`.
pub fn select_x(weights: &WeightState, y_prev: &DenseVec, v_prev: &DenseVec) -> Result<DenseVec> {
    let (c_y, c_v) = search_coefficients(weights)?;
    DenseVec::combine(c_y, y_prev, c_v, v_prev)
}

/// The two convex-combination coefficients of [`select_x`].
pub fn search_coefficients(w: &WeightState) -> Result<(f64, f64)> {
    let (mu, sigma) = (w.mu, w.sigma);
    let c_y = (mu * w.a + sigma) * w.a_prev;
    let c_v = (mu * w.a_prev + sigma) * w.alpha;
    let denom = c_y + c_v;
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::NonFinite {
            iteration: w.k,
            what: "search-point denominator",
        });
    }
    Ok((c_y / denom, c_v / denom))
}

/// Configuration of the accelerated method on a fixed set and prox function.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceleratedMethod {
    set: FeasibleSet,
    prox: ProxFunction,
    lambda: f64,
    mu: Option<f64>,
}

impl AcceleratedMethod {
    pub fn new(set: FeasibleSet, prox: ProxFunction, lambda: f64) -> Result<Self> {
        validate_lambda(lambda)?;
        set.validate()?;
        check_dim(set.dim(), prox.center.dim())?;
        Ok(AcceleratedMethod {
            set,
            prox,
            lambda,
            mu: None,
        })
    }

    /// Uses `mu` in place of the problem's strong-convexity constant.
    pub fn with_strong_convexity(self, mu: f64) -> Self {
        AcceleratedMethod {
            mu: Some(mu),
            ..self
        }
    }

    pub fn set(&self) -> &FeasibleSet {
        &self.set
    }

    pub fn prox(&self) -> &ProxFunction {
        &self.prox
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn strong_convexity(&self, problem: &dyn Problem) -> f64 {
        self.mu.unwrap_or_else(|| problem.strong_convexity())
    }

    /// `y_0 = v_0 = argmin_C phi`, `A_0 = 0`, `s_0 = 0`; also initializes the oracle at `v_0`.
    pub fn initial_state(
        &self,
        problem: &dyn Problem,
        oracle: &mut dyn Oracle,
    ) -> Result<SolverState> {
        check_dim(problem.dim(), self.set.dim())?;
        let mu = self.strong_convexity(problem);
        let weights = WeightState::new(problem.smoothness(), mu, self.prox.sigma, self.lambda)?;
        let v0 = self.prox.minimizer(&self.set)?;
        let (grad_evals, bits) = oracle.initialize(problem, &v0)?;
        Ok(SolverState {
            weights,
            x: v0.clone(),
            y: v0.clone(),
            v: v0,
            s: DenseVec::zeros(problem.dim()),
            prox_acc: ProxAccumulator::new(problem.dim(), mu),
            grad_evals,
            bits,
            weight_scale_log2: 0,
        })
    }

    /// The weights and search point the next step will use.
    pub fn peek_next(&self, state: &SolverState) -> Result<(WeightState, DenseVec)> {
        let w = state.weights.next_weight();
        let x = select_x(&w, &state.y, &state.v)?;
        Ok((w, x))
    }

    /// One iteration; returns the oracle's estimate at the new `x_k`.
    pub fn step(
        &self,
        state: &mut SolverState,
        problem: &dyn Problem,
        oracle: &mut dyn Oracle,
    ) -> Result<DenseVec> {
        let (w, x) = self.peek_next(state)?;
        let k = w.k;
        if !(w.alpha.is_finite() && w.a.is_finite() && w.alpha > 0.0) {
            return Err(Error::NonFinite {
                iteration: k,
                what: "weight",
            });
        }
        let out = oracle.query(problem, &x)?;
        check_dim(problem.dim(), out.grad_estimate.dim())?;
        if !out.grad_estimate.is_finite() {
            return Err(Error::NonFinite {
                iteration: k,
                what: "gradient estimate",
            });
        }
        state.s.add_scaled(-w.alpha, &out.grad_estimate)?;
        state.prox_acc.push(w.alpha, &x)?;
        let v = if state.weight_scale_log2 == 0 {
            solve_v(&state.s, &self.prox, &state.prox_acc, &self.set)?
        } else {
            let prox = ProxFunction {
                center: self.prox.center.clone(),
                sigma: w.sigma,
            };
            solve_v(&state.s, &prox, &state.prox_acc, &self.set)?
        };
        let y = DenseVec::combine(w.a_prev / w.a, &state.y, w.alpha / w.a, &v)?;
        for (vec, what) in [(&x, "x"), (&v, "v"), (&y, "y"), (&state.s, "s")] {
            if !vec.is_finite() {
                return Err(Error::NonFinite { iteration: k, what });
            }
        }
        state.weights = w;
        state.x = x;
        state.v = v;
        state.y = y;
        state.grad_evals += out.component_evals;
        state.bits += out.bits;
        if state.weights.a > RESCALE_ABOVE {
            state.renormalize();
        }
        Ok(out.grad_estimate)
    }

    /// Iterates from the initial state until `stop`, streaming one row per
    /// iteration (including `k = 0`) into `sink`.
    pub fn run_into(
        &self,
        problem: &dyn Problem,
        oracle: &mut dyn Oracle,
        stop: &StoppingRule,
        sink: &mut dyn TraceSink,
    ) -> Result<SolverState> {
        let mut state = self.initial_state(problem, oracle)?;
        loop {
            let row = state.record(problem)?;
            if !row.value.is_finite() {
                return Err(Error::NonFinite {
                    iteration: row.k,
                    what: "objective value",
                });
            }
            sink.record(&row)?;
            if stop.should_stop(&row) {
                return Ok(state);
            }
            self.step(&mut state, problem, oracle)?;
        }
    }

    pub fn run(
        &self,
        problem: &dyn Problem,
        oracle: &mut dyn Oracle,
        stop: &StoppingRule,
    ) -> Result<Trace> {
        let mut trace = Trace::new();
        self.run_into(problem, oracle, stop, &mut trace)?;
        Ok(trace)
    }
}
