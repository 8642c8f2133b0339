use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::ExactOracle;
use crate::problems::Problem;
use crate::prox::{FeasibleSet, ProxFunction};
use crate::solver::AcceleratedMethod;
use crate::vec::DenseVec;

/// Window over which the best value must stop improving.
const WINDOW: usize = 1000;
const REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceOptimum {
    pub f_star: f64,
    pub y_star: DenseVec,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptions {
    pub max_iters: usize,
    pub prox: Option<ProxFunction>,
    pub mu: Option<f64>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            max_iters: 1_000_000,
            prox: None,
            mu: None,
        }
    }
}

pub fn compute_reference_optimum(
    problem: &dyn Problem,
    set: &FeasibleSet,
) -> Result<ReferenceOptimum> {
    compute_reference_optimum_with(problem, set, &ReferenceOptions::default())
}

/// Long exact-oracle run with `lambda = 1`, stopped once the best value
/// improves by at most `1e-14 max(|f|, 1)` over 1000 iterations.
pub fn compute_reference_optimum_with(
    problem: &dyn Problem,
    set: &FeasibleSet,
    opts: &ReferenceOptions,
) -> Result<ReferenceOptimum> {
    let prox = opts
        .prox
        .clone()
        .unwrap_or_else(|| ProxFunction::standard(problem.dim()));
    let mut method = AcceleratedMethod::new(set.clone(), prox, 1.0)?;
    if let Some(mu) = opts.mu {
        method = method.with_strong_convexity(mu);
    }
    let mut oracle = ExactOracle;
    let mut state = method.initial_state(problem, &mut oracle)?;
    let mut best = problem.value(&state.y)?;
    let mut y_star = state.y.clone();
    let mut window_start = best;
    for k in 1..=opts.max_iters {
        method.step(&mut state, problem, &mut oracle)?;
        let f = problem.value(&state.y)?;
        if !f.is_finite() {
            return Err(Error::NonFinite {
                iteration: k,
                what: "objective value",
            });
        }
        if f < best {
            best = f;
            y_star.clone_from(&state.y);
        }
        if k % WINDOW == 0 {
            if window_start - best <= REL_TOL * best.abs().max(1.0) {
                return Ok(ReferenceOptimum {
                    f_star: best,
                    y_star,
                    iterations: k,
                });
            }
            window_start = best;
        }
    }
    Err(Error::NonConvergence(format!(
        "reference run still improving after {} iterations (best {best:e})",
        opts.max_iters
    )))
}
