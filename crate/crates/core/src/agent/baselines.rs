//! Comparison agents: SA* (search from scratch on every goal change) and a
//! GFRA*-style replanner (tree kept, every stored node re-evaluated on
//! goal change, CLOSED-only goal lookup).

use super::trace::{DelayKind, UpdateKind};
use super::{try_budget, AgentConfig, AgentError, Event, RunOutcome, RunStatus, Session};
use crate::dynamics::GoalDynamicsConfig;
use crate::search::SearchResult;
use crate::strips::GroundProblem;

/// SA*: every search episode starts from a fresh tree rooted at the
/// current state, and every observed goal change triggers a new episode.
pub fn run_sastar(
    problem: &GroundProblem,
    cfg: &AgentConfig,
    dynamics: GoalDynamicsConfig,
) -> Result<RunOutcome, AgentError> {
    let mut sess = Session::new(problem, cfg, dynamics);
    let mut first = true;
    while !sess.goal_reached() {
        let mut tree = sess.seed_tree(1, cfg.weight);
        if !std::mem::take(&mut first) {
            sess.log(|| Event::Update {
                kind: UpdateKind::Fresh,
                heuristic_calls: 1,
            });
        }
        let outcome = try_budget!(sess, sess.search(&mut tree, 1));
        let node = match outcome.result {
            SearchResult::Success(n) => n,
            SearchResult::Failure => return Ok(sess.finish(RunStatus::Failure)),
        };
        let solution = tree.state(node).clone();
        sess.install_goal(&solution);
        for a in tree.extract_plan(node).actions {
            try_budget!(sess, sess.budget.check_time());
            if sess.execute(a)? {
                break;
            }
        }
    }
    Ok(sess.finish(RunStatus::Success))
}

/// GFRA*-style: on a goal change the tree is re-rooted at the current
/// state; a CLOSED node satisfying the new goal gives a plan directly,
/// otherwise every stored node is re-evaluated against the new goal, the
/// fringe of the pruned region is reopened, and search resumes.
pub fn run_gfra(
    problem: &GroundProblem,
    cfg: &AgentConfig,
    dynamics: GoalDynamicsConfig,
) -> Result<RunOutcome, AgentError> {
    let mut sess = Session::new(problem, cfg, dynamics);
    let mut i: u32 = 1;
    let mut tree = sess.seed_tree(i, cfg.weight);
    while !sess.goal_reached() {
        let outcome = try_budget!(sess, sess.search(&mut tree, i));
        i += 1;
        let node = match outcome.result {
            SearchResult::Success(node) => node,
            SearchResult::Failure => return Ok(sess.finish(RunStatus::Failure)),
        };
        let solution = tree.state(node).clone();
        sess.install_goal(&solution);
        let mut plan = tree.extract_plan(node).actions;
        loop {
            let mut reaches = true;
            let mut next = 0;
            while !sess.goal_reached() && reaches && next < plan.len() {
                try_budget!(sess, sess.budget.check_time());
                let a = plan[next];
                next += 1;
                if sess.execute(a)? {
                    reaches = problem.validate_plan(&sess.s, &plan[next..], &sess.g);
                }
            }
            if sess.goal_reached() {
                return Ok(sess.finish(RunStatus::Success));
            }
            tree.delete_states_out_of_tree(&sess.s)?;
            match tree.contains_goal_closed(&sess.g) {
                Some(node) => {
                    sess.log(|| Event::Delay {
                        kind: DelayKind::Closed,
                    });
                    plan = tree.extract_plan(node).actions;
                }
                None => break,
            }
        }
        let refreshed = tree.refresh_all(problem, &sess.g, i, &mut sess.evaluator, &mut sess.env.counter);
        try_budget!(sess, sess.budget.check_time());
        tree.retrieve_fringe(problem);
        sess.log(|| Event::Update {
            kind: UpdateKind::Full,
            heuristic_calls: refreshed as u64,
        });
    }
    Ok(sess.finish(RunStatus::Success))
}
