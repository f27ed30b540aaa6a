mod common;

use std::time::Instant;

use common::{oracle_apply, Set};
use mgp_core::strips::{apply, Proposition};
use mgp_core::{ActionId, Goal, GroundAction, GroundProblem, PropSet};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const N: usize = 40;

fn ids() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(0..N as u32, 0..8)
}

fn set(v: &[u32]) -> Set {
    v.iter().copied().collect()
}

fn action(pre: &[u32], add: &[u32], del: &[u32]) -> GroundAction {
    GroundAction::new("a", N, pre.iter().copied(), add.iter().copied(), del.iter().copied()).0
}

#[test]
fn transition_identity_and_composition() {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (ids(), ids(), ids(), ids(), ids(), ids(), ids(), ids());
    runner
        .run(&strategy, |(s, pre1, add1, del1, pre2, add2, del2, extra)| {
            // force applicability of the first action half of the time
            let mut s = s;
            if extra.len() % 2 == 0 {
                s.extend(&pre1);
            }
            let state = PropSet::from_ids(N, s.iter().copied());
            let a = action(&pre1, &add1, &del1);
            let b = action(&pre2, &add2, &del2);

            // conflicting add/del resolve to add
            let del1_eff: Set = set(&del1).difference(&set(&add1)).copied().collect();
            let expected = oracle_apply(&set(&s), &set(&pre1), &set(&add1), &del1_eff);
            let got = apply(&state, &a).ok().map(|x| x.iter().collect::<Set>());
            prop_assert_eq!(&got, &expected);

            // composition: two steps of the problem-level sequence equal
            // two single steps
            let problem = GroundProblem::new(
                "d",
                "p",
                (0..N).map(|i| Proposition::new("p", &[&i.to_string()])).collect(),
                vec![a.clone(), b.clone()],
                state.clone(),
                Goal::partial(PropSet::empty(N)),
                vec![],
            );
            let seq = problem.apply_sequence(&state, &[ActionId(0), ActionId(1)]).ok();
            let stepwise = apply(&state, &a).ok().and_then(|m| apply(&m, &b).ok());
            prop_assert_eq!(seq, stepwise);
            Ok(())
        })
        .unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "10^4 cases took {elapsed:?}");
}

#[test]
fn stack_example() {
    // holding_a=0 clear_b=1 on_a_b=2 clear_a=3 handempty=4
    let a = action(&[0, 1], &[2, 3, 4], &[0, 1]);
    let s = PropSet::from_ids(N, [0, 1]);
    let next = apply(&s, &a).unwrap();
    assert_eq!(next.iter().collect::<Vec<_>>(), vec![2, 3, 4]);
    assert!(apply(&PropSet::from_ids(N, [0]), &a).is_err());
}

#[test]
fn sussman_optimal_plan_reaches_goal() {
    let problem = common::load("blocksworld/domain.pddl", "blocksworld/sussman.pddl");
    let plan = common::solve(&problem, mgp_core::HeuristicKind::Max, 1.0).unwrap();
    let (_, opt) = common::bfs(&problem);
    assert_eq!(opt, Some(6));
    assert_eq!(plan.len(), 6);
    let end = common::oracle_run(&problem, &plan).unwrap();
    assert!(common::set_of(&problem.goal.props).is_subset(&end));
    assert!(problem.validate_plan(&problem.init, &plan, &problem.goal));
    assert!(!problem.validate_plan(&problem.init, &plan[..5], &problem.goal));
}
