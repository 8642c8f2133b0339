use super::{
    binomial, check_batch, dense_bits, draw_batch, subsets, Oracle, OracleOutput, Outcomes,
};
use crate::error::{config, Result};
use crate::problems::Problem;
use crate::rng::{seeded, OracleRng};
use crate::vec::DenseVec;

const REFRESH_EVERY: usize = 1000;

/// Stored component gradients `grad f_l(psi^l)` and their running sum.
#[derive(Debug, Clone)]
pub struct SagaMemory {
    pub psi_grads: Vec<DenseVec>,
    pub running_sum: DenseVec,
    pub batch: usize,
    updates_since_refresh: usize,
    last_drift: f64,
}

impl SagaMemory {
    /// Memory with `psi^l = x0` for every component.
    pub fn at(problem: &dyn Problem, x0: &DenseVec, batch: usize) -> Result<Self> {
        check_batch(batch, problem.num_components())?;
        let psi_grads = (0..problem.num_components())
            .map(|l| problem.component_gradient(l, x0))
            .collect::<Result<Vec<_>>>()?;
        let running_sum = sum_in_order(&psi_grads, problem.dim());
        Ok(SagaMemory {
            psi_grads,
            running_sum,
            batch,
            updates_since_refresh: 0,
            last_drift: 0.0,
        })
    }

    /// Relative distance between the running sum and a fresh recomputation.
    pub fn drift(&self) -> f64 {
        let exact = sum_in_order(&self.psi_grads, self.running_sum.dim());
        let diff = self
            .running_sum
            .sub(&exact)
            .expect("same dimension")
            .norm2();
        diff / exact.norm2().max(1.0)
    }

    /// Drift observed at the most recent periodic refresh.
    pub fn last_refresh_drift(&self) -> f64 {
        self.last_drift
    }

    fn estimate(&self, fresh: &[(usize, DenseVec)], m: usize) -> Result<DenseVec> {
        let scale = m as f64 / self.batch as f64;
        let mut g = self.running_sum.clone();
        for (j, grad) in fresh {
            g.add_scaled(scale, grad)?;
            g.add_scaled(-scale, &self.psi_grads[*j])?;
        }
        Ok(g)
    }

    fn replace(&mut self, fresh: Vec<(usize, DenseVec)>) -> Result<()> {
        for (j, grad) in fresh {
            self.running_sum.add_scaled(1.0, &grad)?;
            self.running_sum.add_scaled(-1.0, &self.psi_grads[j])?;
            self.psi_grads[j] = grad;
        }
        self.updates_since_refresh += 1;
        if self.updates_since_refresh >= REFRESH_EVERY {
            self.last_drift = self.drift();
            self.running_sum = sum_in_order(&self.psi_grads, self.running_sum.dim());
            self.updates_since_refresh = 0;
        }
        Ok(())
    }
}

fn sum_in_order(grads: &[DenseVec], dim: usize) -> DenseVec {
    let mut acc = DenseVec::zeros(dim);
    for g in grads {
        acc.add_scaled(1.0, g).expect("same dimension");
    }
    acc
}

fn fresh_gradients(
    problem: &dyn Problem,
    x: &DenseVec,
    batch: &[usize],
) -> Result<Vec<(usize, DenseVec)>> {
    batch
        .iter()
        .map(|&j| Ok((j, problem.component_gradient(j, x)?)))
        .collect()
}

/// Variance-reduced estimate
/// `g = (m/b) sum_{j in J} (grad f_j(x) - grad f_j(psi^j)) + sum_l grad f_l(psi^l)`,
/// after which `psi^j = x` for `j in J`.
#[derive(Debug, Clone)]
pub struct SagaOracle {
    batch: usize,
    memory: Option<SagaMemory>,
    rng: OracleRng,
}

impl SagaOracle {
    pub fn new(batch: usize, seed: u64) -> Self {
        Self::with_rng(batch, seeded(seed))
    }

    pub fn with_rng(batch: usize, rng: OracleRng) -> Self {
        SagaOracle {
            batch,
            memory: None,
            rng,
        }
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn memory(&self) -> Option<&SagaMemory> {
        self.memory.as_ref()
    }

    fn memory_or_err(&self) -> Result<&SagaMemory> {
        self.memory
            .as_ref()
            .ok_or_else(|| crate::Error::Oracle("SAGA memory used before initialization".into()))
    }
}

impl Oracle for SagaOracle {
    fn name(&self) -> String {
        format!("saga(b={})", self.batch)
    }

    fn initialize(&mut self, problem: &dyn Problem, x0: &DenseVec) -> Result<(u64, u64)> {
        self.memory = Some(SagaMemory::at(problem, x0, self.batch)?);
        let m = problem.num_components();
        Ok((m as u64, dense_bits(problem.dim(), m)))
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        self.memory_or_err()?;
        let m = problem.num_components();
        if self.memory.as_ref().map(|mem| mem.psi_grads.len()) != Some(m) {
            return config("SAGA memory does not match the problem's components");
        }
        let batch = draw_batch(m, self.batch, &mut self.rng);
        let fresh = fresh_gradients(problem, x, &batch)?;
        let memory = self.memory.as_mut().expect("checked above");
        let g = memory.estimate(&fresh, m)?;
        memory.replace(fresh)?;
        Ok(OracleOutput {
            grad_estimate: g,
            component_evals: self.batch as u64,
            bits: dense_bits(problem.dim(), self.batch),
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        let memory = self.memory_or_err()?;
        let m = problem.num_components();
        let batch = draw_batch(m, self.batch, rng);
        memory.estimate(&fresh_gradients(problem, x, &batch)?, m)
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        limit: usize,
    ) -> Result<Option<Outcomes>> {
        let memory = self.memory_or_err()?;
        let m = problem.num_components();
        let count = binomial(m, self.batch);
        if count > limit as u64 {
            return Ok(None);
        }
        let all = fresh_gradients(problem, x, &(0..m).collect::<Vec<_>>())?;
        let p = 1.0 / count as f64;
        subsets(m, self.batch)
            .iter()
            .map(|b| {
                let fresh: Vec<_> = b.iter().map(|&j| all[j].clone()).collect();
                Ok((p, memory.estimate(&fresh, m)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}
