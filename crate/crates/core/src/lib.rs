//! Accelerated dual-averaging gradient method with stochastic first-order
//! oracles, variance-condition diagnostics and an experiment harness.

pub mod baselines;
mod error;
pub mod federated;
pub mod harness;
pub mod oracles;
pub mod problems;
pub mod prox;
pub mod rng;
pub mod solver;
pub mod vec;
pub mod weights;

pub use error::{Error, Result};
pub use oracles::{ExactOracle, GaussianOracle, MinibatchOracle, Oracle, OracleOutput};
pub use problems::Problem;
pub use prox::{FeasibleSet, ProxFunction};
pub use solver::{AcceleratedMethod, SolverState, StoppingRule, Trace, TraceRecord};
pub use vec::DenseVec;
pub use weights::WeightState;
