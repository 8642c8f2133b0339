//! Simulated federated rounds: each client compresses its own shard
//! gradient, and the server sums the messages in client order.

use crate::error::Result;
use crate::oracles::{Codec, Oracle, OracleOutput, Outcomes};
use crate::problems::Problem;
use crate::rng::{derived, OracleRng};
use crate::vec::DenseVec;

#[derive(Debug, Clone, PartialEq)]
pub struct FederatedRound {
    pub k: usize,
    pub per_client_bits: Vec<u64>,
    pub aggregate_estimate: DenseVec,
    pub exact_aggregate: DenseVec,
}

impl FederatedRound {
    pub fn total_bits(&self) -> u64 {
        self.per_client_bits.iter().sum()
    }
}

/// Client `l` draws from the stream `derived(seed, l)`.
#[derive(Debug, Clone)]
pub struct FederatedOracle {
    codec: Codec,
    seed: u64,
    clients: Vec<OracleRng>,
    rounds: usize,
}

impl FederatedOracle {
    pub fn new(codec: Codec, seed: u64) -> Self {
        FederatedOracle {
            codec,
            seed,
            clients: Vec::new(),
            rounds: 0,
        }
    }

    pub fn codec(&self) -> Codec {
        self.codec
    }

    fn ensure_clients(&mut self, m: usize) {
        if self.clients.len() != m {
            self.clients = (0..m as u64).map(|l| derived(self.seed, l)).collect();
        }
    }

    /// One communication round at `x`.
    pub fn round(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<FederatedRound> {
        let m = problem.num_components();
        let n = problem.dim();
        self.codec.validate(n)?;
        self.ensure_clients(m);
        self.rounds += 1;
        let mut aggregate = DenseVec::zeros(n);
        let mut exact = DenseVec::zeros(n);
        let mut per_client_bits = Vec::with_capacity(m);
        for (l, rng) in self.clients.iter_mut().enumerate() {
            let g = problem.component_gradient(l, x)?;
            aggregate.add_scaled(1.0, &self.codec.compress(&g, rng)?)?;
            exact.add_scaled(1.0, &g)?;
            per_client_bits.push(self.codec.bits(n));
        }
        Ok(FederatedRound {
            k: self.rounds,
            per_client_bits,
            aggregate_estimate: aggregate,
            exact_aggregate: exact,
        })
    }
}

impl Oracle for FederatedOracle {
    fn name(&self) -> String {
        format!("federated({})", self.codec.name())
    }

    fn initialize(&mut self, problem: &dyn Problem, _x0: &DenseVec) -> Result<(u64, u64)> {
        self.codec.validate(problem.dim())?;
        self.clients.clear();
        self.ensure_clients(problem.num_components());
        self.rounds = 0;
        Ok((0, 0))
    }

    fn query(&mut self, problem: &dyn Problem, x: &DenseVec) -> Result<OracleOutput> {
        let round = self.round(problem, x)?;
        Ok(OracleOutput {
            component_evals: problem.num_components() as u64,
            bits: round.total_bits(),
            grad_estimate: round.aggregate_estimate,
        })
    }

    fn probe(&self, problem: &dyn Problem, x: &DenseVec, rng: &mut OracleRng) -> Result<DenseVec> {
        let mut aggregate = DenseVec::zeros(problem.dim());
        for l in 0..problem.num_components() {
            let g = problem.component_gradient(l, x)?;
            aggregate.add_scaled(1.0, &self.codec.compress(&g, rng)?)?;
        }
        Ok(aggregate)
    }

    fn outcomes(
        &self,
        problem: &dyn Problem,
        x: &DenseVec,
        _limit: usize,
    ) -> Result<Option<Outcomes>> {
        match self.codec {
            Codec::None => Ok(Some(vec![(1.0, problem.gradient(x)?)])),
            _ => Ok(None),
        }
    }

    fn clone_box(&self) -> Box<dyn Oracle> {
        Box::new(self.clone())
    }
}
