//! Stochastic first-order oracles.
//!
//! An oracle returns `g = grad f(x) + xi` together with metering data. The
//! bit accounting convention is 32 bits per transmitted coordinate for
//! uncompressed gradients, so an oracle that evaluates `c` component
//! gradients of an `n`-dimensional problem reports `32 * n * c` bits;
//! compressing oracles report the closed forms documented on [`Codec`].

mod checks;
mod compress;
mod saga;

pub use checks::{
    check_condition_lemma3, check_strong_growth, noise_second_moment, saga_lambda_bound,
    ConditionReport, SagaLambdaBound,
};
pub use compress::{dither, natural, sparsify, Codec, CompressedOracle};
pub use saga::{SagaMemory, SagaOracle};

use rand_distr::{Distribution, Normal};

use crate::error::{config, Result};
use crate::problems::Problem;
use crate::rng::{seeded, OracleRng};
use crate::vec::DenseVec;

/// Bits for `count` uncompressed `dim`-dimensional gradients.
pub fn dense_bits(dim: usize, count: usize) -> u64 {
    32 * dim as u64 * count as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub grad_estimate: DenseVec,
    /// Per-component gradient evaluations consumed by this query.
    pub component_evals: u64,
    pub bits: u64,
}

/// A finite outcome distribution: `(probability, gradient estimate)` pairs.
pub type Outcomes = Vec<(f64, DenseVec)>;

pub trait Oracle: Send {
    fn name(&self) -> String;

    /// Prepares per-run state at the starting point. Returns the
    /// `(component_evals, bits)` consumed.
    fn initialize(&mut self, _problem: &dyn Problem, _x0: &DenseVec) -> Result<(u64, u64)> {
        Ok((0, 0))
    }

    /// One estimate at `x`; advances the oracle's RNG and any memory.
    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput>;

    /// A draw of the estimate the next `query` would produce, using `rng`
    /// instead of the oracle's own stream and leaving all state untouched.
    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec>;

    /// The exact distribution of the next estimate, if it has at most
    /// `limit` outcomes.
    fn outcomes(
        &self,
        _problem: &dyn Problem,
        _x: &DenseVec,
        _limit: usize,
    ) -> Result<Option<Outcomes>> {
        Ok(None)
    }

    fn clone_box(&self) -> Box<dyn Oracle>;
}

impl Clone for Box<dyn Oracle> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// `g = grad f(x)`.
#[derive(Debug, Clone, Default)]
pub struct ExactOracle;

impl Oracle for ExactOracle {
    fn name(&self) -> String {
        "exact".into()
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        Ok(OracleOutput {
            grad_estimate: problem.gradient(x)?,
            component_evals: problem.num_components() as u64,
            bits: dense_bits(problem.dim(), problem.num_components()),
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, _rng: &mut OracleRng) -> Result<DenseVec> {
        problem.gradient(x)
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        _limit: usize,
    ) -> Result<Option<Outcomes>> {
        Ok(Some(vec![(1.0, problem.gradient(x)?)]))
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}

/// `g = grad f(x) + xi`, `xi ~ N(0, variance I)`.
#[derive(Debug, Clone)]
pub struct GaussianOracle {
    variance: f64,
    rng: OracleRng,
}

impl GaussianOracle {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        Self::with_rng(variance, seeded(seed))
    }

    pub fn with_rng(variance: f64, rng: OracleRng) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return config(format!("noise variance must be >= 0, got {variance}"));
        }
        Ok(GaussianOracle { variance, rng })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

fn perturb(variance: f64, mut g: DenseVec, rng: &mut OracleRng) -> DenseVec {
    if variance > 0.0 {
        let normal = Normal::new(0.0, variance.sqrt()).expect("finite std");
        for v in g.as_mut_slice() {
            *v += normal.sample(rng);
        }
    }
    g
}

impl Oracle for GaussianOracle {
    fn name(&self) -> String {
        format!("gaussian(nu={})", self.variance)
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        let g = perturb(self.variance, problem.gradient(x)?, &mut self.rng);
        Ok(OracleOutput {
            grad_estimate: g,
            component_evals: problem.num_components() as u64,
            bits: dense_bits(problem.dim(), problem.num_components()),
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        Ok(perturb(self.variance, problem.gradient(x)?, rng))
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        _limit: usize,
    ) -> Result<Option<Outcomes>> {
        if self.variance == 0.0 {
            Ok(Some(vec![(1.0, problem.gradient(x)?)]))
        } else {
            Ok(None)
        }
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}

fn check_batch(batch: usize, m: usize) -> Result<()> {
    if batch == 0 || batch > m {
        return config(format!("batch size {batch} must lie in 1..={m}"));
    }
    Ok(())
}

/// Number of `k`-subsets of an `n`-set, saturating at `u64::MAX`.
pub(crate) fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// `g = (m / b) sum_{j in J} grad f_j(x)` with `J` a uniform `b`-subset.
#[derive(Debug, Clone)]
pub struct MinibatchOracle {
    batch: usize,
    rng: OracleRng,
}

impl MinibatchOracle {
    pub fn new(batch: usize, seed: u64) -> Self {
        Self::with_rng(batch, seeded(seed))
    }

    pub fn with_rng(batch: usize, rng: OracleRng) -> Self {
        MinibatchOracle { batch, rng }
    }

    fn estimate(&self, problem: &dyn Problem, x: &DenseVec, batch: &[usize]) -> Result<DenseVec> {
        let scale = problem.num_components() as f64 / self.batch as f64;
        let mut g = DenseVec::zeros(problem.dim());
        for &j in batch {
            g.add_scaled(scale, &problem.component_gradient(j, x)?)?;
        }
        Ok(g)
    }
}

pub(crate) fn draw_batch(m: usize, b: usize, rng: &mut OracleRng) -> Vec<usize> {
    rand::seq::index::sample(rng, m, b).into_vec()
}

impl Oracle for MinibatchOracle {
    fn name(&self) -> String {
        format!("minibatch(b={})", self.batch)
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        check_batch(self.batch, problem.num_components())?;
        let batch = draw_batch(problem.num_components(), self.batch, &mut self.rng);
        Ok(OracleOutput {
            grad_estimate: self.estimate(problem, x, &batch)?,
            component_evals: self.batch as u64,
            bits: dense_bits(problem.dim(), self.batch),
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        check_batch(self.batch, problem.num_components())?;
        let batch = draw_batch(problem.num_components(), self.batch, rng);
        self.estimate(problem, x, &batch)
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        limit: usize,
    ) -> Result<Option<Outcomes>> {
        let m = problem.num_components();
        check_batch(self.batch, m)?;
        let count = binomial(m, self.batch);
        if count > limit as u64 {
            return Ok(None);
        }
        let p = 1.0 / count as f64;
        subsets(m, self.batch)
            .iter()
            .map(|b| Ok((p, self.estimate(problem, x, b)?)))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}
