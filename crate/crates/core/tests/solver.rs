mod common;

use proptest::prelude::*;
use stochastic_accel::federated::FederatedOracle;
use stochastic_accel::oracles::{Codec, SagaOracle};
use stochastic_accel::problems::{synthetic_logistic_dataset, Logistic};
use stochastic_accel::solver::select_x;
use stochastic_accel::weights::phase_switch_index;
use stochastic_accel::{
    AcceleratedMethod, DenseVec, ExactOracle, FeasibleSet, GaussianOracle, MinibatchOracle, Oracle,
    Problem, ProxFunction, StoppingRule, WeightState,
};

#[test]
fn certificate_holds_on_twenty_problems() {
    for inst in common::certificate_instances() {
        let r = common::reference(&inst);
        let excess = common::certificate_excess(&inst, &r, 5000);
        assert!(excess <= 1e-9, "{}: excess {excess:e}", inst.name);
    }
}

#[test]
fn iterates_stay_feasible() {
    for inst in common::certificate_instances() {
        if inst.set.is_unconstrained() {
            continue;
        }
        let p = inst.problem.as_ref();
        let method = AcceleratedMethod::new(inst.set.clone(), ProxFunction::standard(p.dim()), 0.7)
            .unwrap()
            .with_strong_convexity(inst.mu);
        let mut oracle = GaussianOracle::new(0.5, 9).unwrap();
        let mut state = method.initial_state(p, &mut oracle).unwrap();
        for _ in 0..500 {
            method.step(&mut state, p, &mut oracle).unwrap();
            for (v, what) in [(&state.x, "x"), (&state.y, "y"), (&state.v, "v")] {
                assert!(
                    inst.set.contains(v, 1e-10),
                    "{}: {what} left the set",
                    inst.name
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_point_is_momentum_step_when_mu_is_zero(
        l in 0.5f64..50.0, sigma in 0.1f64..5.0, lambda in 0.05f64..=1.0, steps in 0usize..200,
        y in prop::collection::vec(-3.0f64..3.0, 4), v in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let mut w = WeightState::new(l, 0.0, sigma, lambda).unwrap();
        for _ in 0..steps {
            w.advance();
        }
        let next = w.next_weight();
        let (y, v) = (DenseVec::new(y), DenseVec::new(v));
        let x = select_x(&next, &y, &v).unwrap();
        let tau = next.alpha / next.a;
        let momentum = DenseVec::axpy(tau, &v.sub(&y).unwrap(), &y).unwrap();
        prop_assert!(x.max_abs_diff(&momentum).unwrap() <= 1e-12);
    }
}

fn oracles(seed: u64) -> Vec<Box<dyn Oracle>> {
    vec![
        Box::new(ExactOracle),
        Box::new(GaussianOracle::new(0.3, seed).unwrap()),
        Box::new(MinibatchOracle::new(3, seed)),
        Box::new(SagaOracle::new(3, seed)),
        Box::new(FederatedOracle::new(Codec::Dither { levels: 4 }, seed)),
        Box::new(FederatedOracle::new(Codec::Natural, seed)),
    ]
}

#[test]
fn identical_seeds_give_identical_traces() {
    let p = Logistic::new(synthetic_logistic_dataset(24, 4, 5), 0.1, 6).unwrap();
    let method = AcceleratedMethod::new(
        FeasibleSet::ball(DenseVec::zeros(4), 2.0).unwrap(),
        ProxFunction::standard(4),
        0.3,
    )
    .unwrap();
    let stop = StoppingRule::iterations(300);
    for (mut a, (mut b, mut c)) in oracles(17)
        .into_iter()
        .zip(oracles(17).into_iter().zip(oracles(18)))
    {
        let ta = method.run(&p, a.as_mut(), &stop).unwrap();
        let tb = method.run(&p, b.as_mut(), &stop).unwrap();
        assert_eq!(ta, tb, "{}", a.name());
        if a.name() != "exact" {
            let tc = method.run(&p, c.as_mut(), &stop).unwrap();
            assert_ne!(ta, tc, "{} ignores its seed", a.name());
        }
    }
}

/// After the switch index the factor `A_{k-1}/A_k` is at most
/// `1/(1 + sqrt(lambda mu / L)/2)`. Before it, `alpha_k / A_k` is at most
/// `sqrt(lambda mu / L + 4/k^2)`, which is the `2/k` regime up to the
/// strong-convexity term.
#[test]
fn contraction_switches_to_linear_rate() {
    let p = common::fig1_problem();
    let (l, mu) = (p.smoothness(), p.strong_convexity());
    for lambda in [1.0, 0.1] {
        let switch = phase_switch_index(l, mu, lambda).unwrap();
        let trace =
            common::exact_trace(&p, FeasibleSet::unconstrained(p.dim()), lambda, 3 * switch);
        let q = lambda * mu / l;
        for w in trace.windows(2).skip(1) {
            let (k, ratio) = (w[1].k as f64, w[0].a / w[1].a);
            assert!(
                ratio >= 1.0 - (q + 4.0 / (k * k)).sqrt() - 1e-12,
                "k={k} ratio={ratio}"
            );
            if w[1].k >= switch {
                assert!(
                    ratio <= 1.0 / (1.0 + 0.5 * q.sqrt()) + 1e-15,
                    "k={k} ratio={ratio}"
                );
            }
        }
    }
}

#[test]
fn stopping_rules_end_runs_early() {
    let p = Logistic::new(synthetic_logistic_dataset(40, 3, 2), 1.0, 8).unwrap();
    let method = AcceleratedMethod::new(
        FeasibleSet::unconstrained(3),
        ProxFunction::standard(3),
        1.0,
    )
    .unwrap();
    let full = method
        .run(&p, &mut ExactOracle, &StoppingRule::iterations(400))
        .unwrap();
    let f_star = full.last().unwrap().value;
    let gap = method
        .run(
            &p,
            &mut ExactOracle,
            &StoppingRule::iterations(400).with_gap(f_star, 1e-3),
        )
        .unwrap();
    let last = gap.last().unwrap();
    assert!(last.value - f_star <= 1e-3);
    assert!(gap[gap.len() - 2].value - f_star > 1e-3);
    let budget = method
        .run(
            &p,
            &mut SagaOracle::new(2, 0),
            &StoppingRule::iterations(400).with_budget(100),
        )
        .unwrap();
    // 8 for the initial pass, then 2 per step
    assert_eq!(budget.last().unwrap().grad_evals, 100);
    assert_eq!(budget.last().unwrap().k, 46);
}
