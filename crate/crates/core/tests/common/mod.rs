#![allow(dead_code)]

pub mod corpus;

use stochastic_accel::harness::{
    compute_reference_optimum_with, ReferenceOptimum, ReferenceOptions,
};
use stochastic_accel::oracles::ExactOracle;
use stochastic_accel::problems::{random_least_squares, synthetic_logistic_dataset, Logistic};
use stochastic_accel::{
    AcceleratedMethod, DenseVec, FeasibleSet, Problem, ProxFunction, StoppingRule, Trace,
};

pub struct Instance {
    pub name: String,
    pub problem: Box<dyn Problem>,
    pub set: FeasibleSet,
    /// Strong-convexity constant handed to the method (at most the true one).
    pub mu: f64,
}

/// Twenty small problems covering quadratics and logistic losses, inside
/// and outside constraints, with and without using strong convexity.
pub fn certificate_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for i in 0..20u64 {
        let problem: Box<dyn Problem> = if i % 2 == 0 {
            Box::new(random_least_squares(12 + i as usize, 6, 100 + i).unwrap())
        } else {
            let mut d = synthetic_logistic_dataset(60, 5, 200 + i);
            d.normalize_rows();
            Box::new(Logistic::new(d, 0.05, 6).unwrap())
        };
        let dim = problem.dim();
        let set = match (i / 2) % 3 {
            0 => FeasibleSet::unconstrained(dim),
            1 => FeasibleSet::ball(DenseVec::new(vec![0.1; dim]), 0.3).unwrap(),
            _ => FeasibleSet::boxed(
                DenseVec::new(vec![-0.2; dim]),
                DenseVec::new(vec![0.25; dim]),
            )
            .unwrap(),
        };
        let mu = if (i / 6) % 2 == 0 {
            problem.strong_convexity()
        } else {
            0.0
        };
        out.push(Instance {
            name: format!("instance {i}"),
            problem,
            set,
            mu,
        });
    }
    out
}

pub fn reference(inst: &Instance) -> ReferenceOptimum {
    compute_reference_optimum_with(
        inst.problem.as_ref(),
        &inst.set,
        &ReferenceOptions::default(),
    )
    .unwrap_or_else(|e| panic!("{}: {e}", inst.name))
}

/// Largest relative excess of `f(y_k) - f*` over `phi(y*) / A_k`; nonpositive
/// when the certificate holds everywhere.
pub fn certificate_excess(inst: &Instance, reference: &ReferenceOptimum, steps: usize) -> f64 {
    let prox = ProxFunction::standard(inst.problem.dim());
    let method = AcceleratedMethod::new(inst.set.clone(), prox.clone(), 1.0)
        .unwrap()
        .with_strong_convexity(inst.mu);
    let trace = method
        .run(
            inst.problem.as_ref(),
            &mut ExactOracle,
            &StoppingRule::iterations(steps),
        )
        .unwrap();
    let phi = prox.value(&reference.y_star).unwrap();
    trace
        .iter()
        .skip(1)
        .map(|r| {
            let bound = phi / r.a;
            (r.value - reference.f_star - bound) / (1.0 + bound)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn fig1_problem() -> stochastic_accel::problems::LeastSquares {
    random_least_squares(50, 50, 0).unwrap()
}

pub fn exact_trace(problem: &dyn Problem, set: FeasibleSet, lambda: f64, steps: usize) -> Trace {
    AcceleratedMethod::new(set, ProxFunction::standard(problem.dim()), lambda)
        .unwrap()
        .run(problem, &mut ExactOracle, &StoppingRule::iterations(steps))
        .unwrap()
}
