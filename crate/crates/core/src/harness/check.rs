use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{config, Result};
use crate::oracles::{check_condition_lemma3, check_strong_growth, ConditionReport};
use crate::problems::Problem;
use crate::rng::derived;

/// Stream index reserved for Monte-Carlo probing, distinct from the run's own.
const PROBE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub k: usize,
    /// `f(y_k)` after the step.
    pub value: f64,
    pub lemma3: ConditionReport,
    pub strong_growth: ConditionReport,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckSummary {
    pub iterations: usize,
    pub lemma3_violations: usize,
    pub strong_growth_violations: usize,
}

impl CheckSummary {
    pub fn from_rows(rows: &[CheckRow]) -> Self {
        CheckSummary {
            iterations: rows.len(),
            lemma3_violations: rows.iter().filter(|r| !r.lemma3.satisfied).count(),
            strong_growth_violations: rows.iter().filter(|r| !r.strong_growth.satisfied).count(),
        }
    }
}

/// Runs one trajectory and evaluates both variance conditions at every
/// search point before the oracle is queried there. Probing uses its own
/// RNG and cloned oracle state, so the trajectory matches a plain run.
pub fn check_trajectory(
    problem: &dyn Problem,
    cfg: &ExperimentConfig,
    lambda: f64,
    variance: f64,
    seed: u64,
    iterations: usize,
    num_mc: usize,
) -> Result<Vec<CheckRow>> {
    if num_mc == 0 {
        return config("num_mc must be at least 1");
    }
    let method = cfg.build_method(problem, lambda)?;
    let mut oracle = cfg.build_oracle(variance, seed)?;
    let mut probe_rng = derived(seed, PROBE_STREAM);
    let mut state = method.initial_state(problem, oracle.as_mut())?;
    let mut rows = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (w, x) = method.peek_next(&state)?;
        let lemma3 = check_condition_lemma3(
            problem,
            oracle.as_ref(),
            &x,
            &state.x,
            &w,
            num_mc,
            &mut probe_rng,
        )?;
        let mut strong_growth =
            check_strong_growth(problem, oracle.as_ref(), &x, lambda, num_mc, &mut probe_rng)?;
        strong_growth.k = w.k;
        method.step(&mut state, problem, oracle.as_mut())?;
        rows.push(CheckRow {
            k: w.k,
            value: problem.value(&state.y)?,
            lemma3,
            strong_growth,
        });
    }
    Ok(rows)
}

/// Checks the first lambda and variance of the sweep with the base seed.
pub fn check_config(cfg: &ExperimentConfig, normalize_rows: bool) -> Result<Vec<CheckRow>> {
    cfg.validate()?;
    let problem = cfg.build_problem(normalize_rows)?;
    let lambda = cfg.lambda_value(cfg.sweep.lambdas[0], problem.as_ref())?;
    let iterations = cfg.check.max_iters.unwrap_or(cfg.solver.max_iters);
    check_trajectory(
        problem.as_ref(),
        cfg,
        lambda,
        cfg.sweep.variances[0],
        cfg.sweep.base_seed,
        iterations,
        cfg.check.num_mc,
    )
}
