//! The scalar weight recursion driving the accelerated method.
//!
//! Each step picks the positive `alpha_k` with
//! `L * alpha_k^2 / A_k = lambda * (mu * A_k + sigma)` where
//! `A_k = A_{k-1} + alpha_k`. Substituting gives the quadratic
//!
//! ```text
//! (L - lambda mu) a^2 - lambda (2 mu A_{k-1} + sigma) a - lambda (mu A_{k-1}^2 + sigma A_{k-1}) = 0
//! ```
//!
//! whose positive root is computed in closed form.

use serde::Serialize;

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightState {
    pub smoothness: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub k: usize,
    /// `A_{k-1}`
    pub a_prev: f64,
    /// `alpha_k`
    pub alpha: f64,
    /// `A_k`
    pub a: f64,
}

impl WeightState {
    /// The state before the first step: `k = 0`, `A_0 = 0`.
    pub fn new(smoothness: f64, mu: f64, sigma: f64, lambda: f64) -> Result<Self> {
        if !(smoothness.is_finite() && mu.is_finite() && mu >= 0.0 && smoothness > mu) {
            return config(format!("need L > mu >= 0, got L = {smoothness}, mu = {mu}"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return config(format!("prox modulus sigma must be > 0, got {sigma}"));
        }
        validate_lambda(lambda)?;
        Ok(WeightState {
            smoothness,
            mu,
            sigma,
            lambda,
            k: 0,
            a_prev: 0.0,
            alpha: 0.0,
            a: 0.0,
        })
    }

    /// The state one step later.
    pub fn next_weight(&self) -> WeightState {
        let (l, mu, sigma, lam) = (self.smoothness, self.mu, self.sigma, self.lambda);
        let a0 = self.a;
        let quad = l - lam * mu;
        let lin = lam * (2.0 * mu * a0 + sigma);
        let constant = lam * (mu * a0 * a0 + sigma * a0);
        // lin > 0 and constant >= 0, so the "+" root has no cancellation.
        let disc = lin * lin + 4.0 * quad * constant;
        let alpha = (lin + disc.sqrt()) / (2.0 * quad);
        WeightState {
            k: self.k + 1,
            a_prev: a0,
            alpha,
            a: a0 + alpha,
            ..*self
        }
    }

    pub fn advance(&mut self) {
        *self = self.next_weight();
    }

    /// Relative residual of `L alpha^2 / A = lambda (mu A + sigma)`.
    pub fn identity_residual(&self) -> f64 {
        let lhs = self.smoothness * self.alpha * self.alpha / self.a;
        let rhs = self.lambda * (self.mu * self.a + self.sigma);
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    }
}

pub(crate) fn validate_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        config(format!("lambda must lie in (0, 1], got {lambda}"))
    }
}

/// `(lambda sigma / 2L) * prod_{i=1..k} (1 + max(2/i, sqrt(lambda mu / L))) - lambda sigma / 2L`.
pub fn growth_lower_bound(smoothness: f64, mu: f64, sigma: f64, lambda: f64, k: usize) -> f64 {
    let c = lambda * sigma / (2.0 * smoothness);
    let linear = (lambda * mu / smoothness).sqrt();
    let product = (1..=k).fold(1.0, |p, i| p * (1.0 + (2.0 / i as f64).max(linear)));
    c * product - c
}

/// First index at which the linear-rate factor `sqrt(lambda mu / L)` reaches
/// the `2/i` factor, i.e. `ceil(2 sqrt(L / (lambda mu)))`. `None` when
/// `mu == 0` (the `2/i` factor always dominates).
pub fn phase_switch_index(smoothness: f64, mu: f64, lambda: f64) -> Option<usize> {
    if mu <= 0.0 {
        return None;
    }
    Some((2.0 * (smoothness / (lambda * mu)).sqrt()).ceil() as usize)
}
