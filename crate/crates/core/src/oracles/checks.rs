//! Diagnostics for the variance conditions under which acceleration is retained.

use serde::Serialize;

use super::Oracle;
use crate::error::{config, Result};
use crate::problems::Problem;
use crate::rng::OracleRng;
use crate::vec::DenseVec;
use crate::weights::{validate_lambda, WeightState};

/// Largest outcome space enumerated exactly.
pub const EXHAUSTIVE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub k: usize,
    pub lhs_variance_estimate: f64,
    pub rhs_bound: f64,
    pub satisfied: bool,
    pub num_mc_samples: usize,
    /// `true` when the left side is an exact expectation.
    pub exhaustive: bool,
}

impl ConditionReport {
    fn new(k: usize, lhs: f64, rhs: f64, samples: usize, exhaustive: bool) -> Self {
        ConditionReport {
            k,
            lhs_variance_estimate: lhs,
            rhs_bound: rhs,
            satisfied: lhs <= rhs,
            num_mc_samples: samples,
            exhaustive,
        }
    }
}

/// `E ||g - grad f(x)||^2` for the oracle's next estimate: exact when the
/// outcome space is small, otherwise a mean over `num_mc` probes.
/// Returns `(estimate, samples, exhaustive)`.
pub fn noise_second_moment(
    problem: &dyn Problem,
    oracle: &dyn Oracle,
    x: &DenseVec,
    num_mc: usize,
    rng: &mut OracleRng,
) -> Result<(f64, usize, bool)> {
    let exact = problem.gradient(x)?;
    if let Some(outcomes) = oracle.outcomes(problem, x, EXHAUSTIVE_LIMIT)? {
        let mut acc = 0.0;
        for (p, g) in &outcomes {
            acc += p * g.dist_sq(&exact)?;
        }
        return Ok((acc, outcomes.len(), true));
    }
    if num_mc == 0 {
        return config("Monte-Carlo checks need at least one sample");
    }
    let mut acc = 0.0;
    for _ in 0..num_mc {
        acc += oracle.probe(problem, x, rng)?.dist_sq(&exact)?;
    }
    Ok((acc / num_mc as f64, num_mc, false))
}

/// `E ||xi_k||^2 <= (1 / 4 lambda) (A_{k-1} / A_k) ||grad f(x_k) - grad f(x_{k-1})||^2`
/// with `weights` already advanced to iteration `k`.
pub fn check_condition_lemma3(
    problem: &dyn Problem,
    oracle: &dyn Oracle,
    x_k: &DenseVec,
    x_prev: &DenseVec,
    weights: &WeightState,
    num_mc: usize,
    rng: &mut OracleRng,
) -> Result<ConditionReport> {
    let (lhs, samples, exhaustive) = noise_second_moment(problem, oracle, x_k, num_mc, rng)?;
    let diff = problem.gradient(x_k)?.dist_sq(&problem.gradient(x_prev)?)?;
    let ratio = if weights.a > 0.0 {
        weights.a_prev / weights.a
    } else {
        0.0
    };
    let rhs = ratio * diff / (4.0 * weights.lambda);
    Ok(ConditionReport::new(
        weights.k, lhs, rhs, samples, exhaustive,
    ))
}

/// Strong growth: `E ||xi||^2 <= ((1 - lambda) / (1 + lambda)) ||grad f(x)||^2`.
pub fn check_strong_growth(
    problem: &dyn Problem,
    oracle: &dyn Oracle,
    x: &DenseVec,
    lambda: f64,
    num_mc: usize,
    rng: &mut OracleRng,
) -> Result<ConditionReport> {
    validate_lambda(lambda)?;
    let (lhs, samples, exhaustive) = noise_second_moment(problem, oracle, x, num_mc, rng)?;
    let rhs = (1.0 - lambda) / (1.0 + lambda) * problem.gradient(x)?.norm2_sq();
    Ok(ConditionReport::new(0, lhs, rhs, samples, exhaustive))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SagaLambdaBound {
    /// `min{1/(m+1), (L/mu) b^2 / (16 m^2)}`, with `b^2 / (16 m^2)` when `mu = 0`.
    pub batch_bound: f64,
    /// `b^3 / (96 m^2)`, where `lambda 96 m^2 / b^3 - 1` vanishes.
    pub factor_lambda: f64,
    /// `batch_bound * 96 m^2 / b^3 <= 1`.
    pub factor_ok_at_bound: bool,
    /// The smaller of the two.
    pub lambda: f64,
}

pub fn saga_lambda_bound(m: usize, b: usize, smoothness: f64, mu: f64) -> Result<SagaLambdaBound> {
    if m == 0 || b == 0 || b > m {
        return config(format!("need 1 <= b <= m, got m = {m}, b = {b}"));
    }
    if !(smoothness > mu && mu >= 0.0 && smoothness.is_finite()) {
        return config(format!("need L > mu >= 0, got L = {smoothness}, mu = {mu}"));
    }
    let (m, b) = (m as f64, b as f64);
    let ratio = if mu > 0.0 { smoothness / mu } else { 1.0 };
    let batch_bound = (1.0 / (m + 1.0)).min(ratio * b * b / (16.0 * m * m));
    let factor_lambda = b * b * b / (96.0 * m * m);
    Ok(SagaLambdaBound {
        batch_bound,
        factor_lambda,
        factor_ok_at_bound: batch_bound * 96.0 * m * m / (b * b * b) <= 1.0,
        lambda: batch_bound.min(factor_lambda),
    })
}
