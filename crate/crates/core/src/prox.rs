//! Feasible sets, the quadratic prox function and the dual-averaging step
//! `v = argmax_{u in C} <s, u> - phi(u) - (mu/2) sum_i alpha_i ||x_i - u||^2`.
//!
//! The objective of that maximization is an isotropic concave quadratic with
//! curvature `mu A + sigma`, so on the supported sets the constrained
//! maximizer is the Euclidean projection of the unconstrained one.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, config, Result};
use crate::vec::DenseVec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSet {
    Unconstrained { dim: usize },
    EuclideanBall { center: DenseVec, radius: f64 },
    Box { lower: DenseVec, upper: DenseVec },
}

impl FeasibleSet {
    pub fn unconstrained(dim: usize) -> Self {
        FeasibleSet::Unconstrained { dim }
    }

    pub fn ball(center: DenseVec, radius: f64) -> Result<Self> {
        let set = FeasibleSet::EuclideanBall { center, radius };
        set.validate()?;
        Ok(set)
    }

    pub fn boxed(lower: DenseVec, upper: DenseVec) -> Result<Self> {
        let set = FeasibleSet::Box { lower, upper };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::Unconstrained { .. } => Ok(()),
            FeasibleSet::EuclideanBall { center, radius } => {
                if !(*radius > 0.0 && radius.is_finite()) || !center.is_finite() {
                    return config(format!("ball radius must be positive, got {radius}"));
                }
                Ok(())
            }
            FeasibleSet::Box { lower, upper } => {
                check_dim(lower.dim(), upper.dim())?;
                if lower
                    .iter()
                    .zip(upper.iter())
                    .any(|(l, u)| l.is_nan() || u.is_nan() || l > u)
                {
                    return config("box requires lower <= upper componentwise");
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Unconstrained { dim } => *dim,
            FeasibleSet::EuclideanBall { center, .. } => center.dim(),
            FeasibleSet::Box { lower, .. } => lower.dim(),
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        matches!(self, FeasibleSet::Unconstrained { .. })
    }

    /// Nearest point of the set in the Euclidean norm.
    pub fn project(&self, x: &DenseVec) -> Result<DenseVec> {
        check_dim(self.dim(), x.dim())?;
        Ok(match self {
            FeasibleSet::Unconstrained { .. } => x.clone(),
            FeasibleSet::EuclideanBall { center, radius } => {
                let d = x.sub(center)?;
                let n = d.norm2();
                if n <= *radius {
                    x.clone()
                } else {
                    DenseVec::axpy(radius / n, &d, center)?
                }
            }
            FeasibleSet::Box { lower, upper } => DenseVec::new(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.clamp(*l, *u))
                    .collect(),
            ),
        })
    }

    /// Membership up to an absolute slack `tol`.
    pub fn contains(&self, x: &DenseVec, tol: f64) -> bool {
        if x.dim() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::Unconstrained { .. } => true,
            FeasibleSet::EuclideanBall { center, radius } => x
                .dist_sq(center)
                .map(|d| d.sqrt() <= radius + tol)
                .unwrap_or(false),
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
        }
    }
}

/// `phi(u) = (sigma / 2) ||u - center||^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxFunction {
    pub center: DenseVec,
    pub sigma: f64,
}

impl ProxFunction {
    pub fn new(center: DenseVec, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return config(format!("prox modulus sigma must be > 0, got {sigma}"));
        }
        Ok(ProxFunction { center, sigma })
    }

    /// `0.5 ||u||^2`.
    pub fn standard(dim: usize) -> Self {
        ProxFunction {
            center: DenseVec::zeros(dim),
            sigma: 1.0,
        }
    }

    pub fn value(&self, u: &DenseVec) -> Result<f64> {
        Ok(0.5 * self.sigma * u.dist_sq(&self.center)?)
    }

    /// `argmin_{u in C} phi(u)`.
    pub fn minimizer(&self, set: &FeasibleSet) -> Result<DenseVec> {
        set.project(&self.center)
    }
}

/// Running `sum_i alpha_i x_i` and `A_k = sum_i alpha_i` for the
/// strong-convexity part of the time-varying prox function.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxAccumulator {
    pub weighted_x_sum: DenseVec,
    pub weight_total: f64,
    pub mu: f64,
}

impl ProxAccumulator {
    pub fn new(dim: usize, mu: f64) -> Self {
        ProxAccumulator {
            weighted_x_sum: DenseVec::zeros(dim),
            weight_total: 0.0,
            mu,
        }
    }

    pub fn push(&mut self, alpha: f64, x: &DenseVec) -> Result<()> {
        self.weighted_x_sum.add_scaled(alpha, x)?;
        self.weight_total += alpha;
        Ok(())
    }
}

/// The maximizer `v` of `<s,u> - phi(u) - (mu/2) sum_i alpha_i ||x_i - u||^2` over `set`.
pub fn solve_v(
    s: &DenseVec,
    prox: &ProxFunction,
    acc: &ProxAccumulator,
    set: &FeasibleSet,
) -> Result<DenseVec> {
    check_dim(s.dim(), prox.center.dim())?;
    check_dim(s.dim(), acc.weighted_x_sum.dim())?;
    let curvature = acc.mu * acc.weight_total + prox.sigma;
    if curvature.is_nan() || curvature <= 0.0 {
        return config("mu A + sigma must be positive");
    }
    let mut num = s.clone();
    num.add_scaled(acc.mu, &acc.weighted_x_sum)?;
    num.add_scaled(prox.sigma, &prox.center)?;
    set.project(&num.scaled(1.0 / curvature))
}

/// Value of the maximized objective at `u` (up to the constant in `x_i`).
pub fn dual_objective(
    s: &DenseVec,
    prox: &ProxFunction,
    acc: &ProxAccumulator,
    u: &DenseVec,
) -> Result<f64> {
    // sum_i alpha_i ||x_i - u||^2 = A ||u||^2 - 2 <u, sum alpha_i x_i> + const
    let quad = acc.weight_total * u.norm2_sq() - 2.0 * u.dot(&acc.weighted_x_sum)?;
    Ok(s.dot(u)? - prox.value(u)? - 0.5 * acc.mu * quad)
}

/// `hat v_{k-1} = ((mu A_{k-1} + sigma) v_{k-1} + mu alpha_k x_k) / (mu A_k + sigma)`.
pub fn hat_v(
    prev_v: &DenseVec,
    x_k: &DenseVec,
    mu: f64,
    a_prev: f64,
    a: f64,
    sigma: f64,
    alpha: f64,
) -> Result<DenseVec> {
    let denom = mu * a + sigma;
    if denom.is_nan() || denom <= 0.0 {
        return config("mu A + sigma must be positive");
    }
    DenseVec::combine(
        (mu * a_prev + sigma) / denom,
        prev_v,
        mu * alpha / denom,
        x_k,
    )
}
