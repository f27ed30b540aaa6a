//! The MGP agent: incremental weighted A* with Open-Check and Plan-Follow
//! delays.

use super::trace::{DelayKind, UpdateKind};
use super::{try_budget, AgentConfig, AgentError, Event, RunOutcome, RunStatus, Session};
use crate::dynamics::{CostCounter, GoalDynamicsConfig};
use crate::heuristics::{HValue, HeuristicEvaluator};
use crate::search::{NodeId, SearchResult, SearchTree};
use crate::strips::{ActionId, Goal, GroundProblem, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelayDecision {
    OpenCheck(NodeId),
    PlanFollow,
    MustSearch,
}

/// Single-entry cache for `h(p, g)`.
#[derive(Clone, Debug, Default)]
pub struct PlanFollowMemo {
    entry: Option<(State, State, HValue)>,
}

impl PlanFollowMemo {
    fn get_or_eval(
        &mut self,
        problem: &GroundProblem,
        p: &Goal,
        g: &Goal,
        evaluator: &mut HeuristicEvaluator,
        counter: &mut CostCounter,
    ) -> HValue {
        if let Some((mp, mg, h)) = &self.entry {
            if *mp == p.props && *mg == g.props {
                return *h;
            }
        }
        let h = evaluator.evaluate(problem, &p.props, &g.props, counter);
        self.entry = Some((p.props.clone(), g.props.clone(), h));
        h
    }
}

/// `h(s,g)·c > h(s,p) + h(p,g)`. Any infinite term forces a new search.
pub fn plan_follow_holds(h_sg: HValue, h_sp: HValue, h_pg: HValue, c: f64) -> bool {
    match (h_sg.value(), h_sp.value(), h_pg.value()) {
        (Some(sg), Some(sp), Some(pg)) => sg as f64 * c > (sp as f64 + pg as f64),
        _ => false,
    }
}

/// CanDelayNewSearch. Open-Check first: a stored node (OPEN or CLOSED)
/// satisfying `g`. Then Plan-Follow, only while some of the plan built
/// for `p` remains to be executed.
#[allow(clippy::too_many_arguments)]
pub fn can_delay_new_search(
    problem: &GroundProblem,
    tree: &SearchTree,
    s: &State,
    g: &Goal,
    p: &Goal,
    plan_remaining: bool,
    cfg: &AgentConfig,
    evaluator: &mut HeuristicEvaluator,
    counter: &mut CostCounter,
    memo: &mut PlanFollowMemo,
) -> DelayDecision {
    if cfg.open_check {
        if let Some(node) = tree.contains_goal(g) {
            return DelayDecision::OpenCheck(node);
        }
    }
    if cfg.plan_follow && plan_remaining {
        let h_sg = evaluator.evaluate(problem, s, &g.props, counter);
        let h_sp = evaluator.evaluate(problem, s, &p.props, counter);
        let h_pg = memo.get_or_eval(problem, p, g, evaluator, counter);
        if plan_follow_holds(h_sg, h_sp, h_pg, cfg.delay_coef) {
            return DelayDecision::PlanFollow;
        }
    }
    DelayDecision::MustSearch
}

struct PlanCursor {
    actions: Vec<ActionId>,
    next: usize,
}

impl PlanCursor {
    fn new(actions: Vec<ActionId>) -> Self {
        PlanCursor { actions, next: 0 }
    }

    fn remaining(&self) -> &[ActionId] {
        &self.actions[self.next..]
    }

    fn is_empty(&self) -> bool {
        self.next >= self.actions.len()
    }
}

/// Runs MGP until the goal is reached, search fails, or a budget trips.
///
/// Each Search episode ends with the episode counter `i` incremented, so
/// the tree update that precedes the next search already stamps the
/// current state with the next episode's number. After every executed
/// action the goal catches up with the counter; execution continues while
/// the remaining plan still reaches the goal, or unconditionally while a
/// Plan-Follow delay is in force.
pub fn run_mgp(
    problem: &GroundProblem,
    cfg: &AgentConfig,
    dynamics: GoalDynamicsConfig,
) -> Result<RunOutcome, AgentError> {
    let mut sess = Session::new(problem, cfg, dynamics);
    let mut i: u32 = 1;
    let mut tree = sess.seed_tree(i, cfg.weight);
    let mut memo = PlanFollowMemo::default();
    while !sess.goal_reached() {
        let outcome = try_budget!(sess, sess.search(&mut tree, i));
        i += 1;
        let node = match outcome.result {
            SearchResult::Success(node) => node,
            SearchResult::Failure => return Ok(sess.finish(RunStatus::Failure)),
        };
        let solution = tree.state(node).clone();
        sess.install_goal(&solution);

        let mut plan = PlanCursor::new(tree.extract_plan(node).actions);
        let mut p = sess.g.clone();
        let mut path_follow = false;
        let mut reaches = true;
        loop {
            while (!sess.goal_reached() && reaches && !plan.is_empty()) || (path_follow && !plan.is_empty()) {
                try_budget!(sess, sess.budget.check_time());
                let a = plan.actions[plan.next];
                plan.next += 1;
                if sess.execute(a)? {
                    reaches = problem.validate_plan(&sess.s, plan.remaining(), &sess.g);
                }
            }
            if sess.goal_reached() {
                return Ok(sess.finish(RunStatus::Success));
            }
            tree.delete_states_out_of_tree(&sess.s)?;
            let decision = can_delay_new_search(
                problem,
                &tree,
                &sess.s,
                &sess.g,
                &p,
                !plan.is_empty(),
                cfg,
                &mut sess.evaluator,
                &mut sess.env.counter,
                &mut memo,
            );
            match decision {
                DelayDecision::OpenCheck(node) => {
                    sess.log(|| Event::Delay {
                        kind: DelayKind::OpenCheck,
                    });
                    plan = PlanCursor::new(tree.extract_plan(node).actions);
                    p = sess.g.clone();
                    path_follow = false;
                    reaches = true;
                }
                DelayDecision::PlanFollow => {
                    sess.log(|| Event::Delay {
                        kind: DelayKind::PlanFollow,
                    });
                    path_follow = true;
                }
                DelayDecision::MustSearch => break,
            }
        }
        let before = sess.env.counter.heuristic_calls();
        tree.update_search_tree(problem, &sess.s, &sess.g, i, &mut sess.evaluator, &mut sess.env.counter);
        let calls = sess.env.counter.heuristic_calls() - before;
        sess.log(|| Event::Update {
            kind: UpdateKind::Conservative,
            heuristic_calls: calls,
        });
    }
    Ok(sess.finish(RunStatus::Success))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_follow_inequality() {
        let f = HValue::finite;
        assert!(plan_follow_holds(f(10), f(4), f(3), 1.2));
        assert!(!plan_follow_holds(f(5), f(4), f(3), 1.2));
        // unchanged goal: h(p,g) = 0 and h(s,p) = h(s,g)
        assert!(plan_follow_holds(f(7), f(7), f(0), 1.2));
        assert!(!plan_follow_holds(f(7), f(7), f(0), 1.0));
        assert!(!plan_follow_holds(f(0), f(0), f(0), 1.2));
        assert!(!plan_follow_holds(HValue::INFINITY, f(1), f(1), 1.2));
        assert!(!plan_follow_holds(f(9), HValue::INFINITY, f(1), 1.2));
        assert!(!plan_follow_holds(f(9), f(1), HValue::INFINITY, 1.2));
    }
}
