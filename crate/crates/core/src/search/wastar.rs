//! Weighted A* over a reusable [`SearchTree`].

use crate::budget::{Budget, ResourceExceeded};
use crate::dynamics::CostCounter;
use crate::heuristics::HeuristicEvaluator;
use crate::search::tree::{NodeId, SearchTree};
use crate::strips::{apply_unchecked, goal_satisfied, Goal, GroundProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Success(NodeId),
    Failure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub result: SearchResult,
    pub expanded: u64,
    pub generated: u64,
    pub reopened: u64,
    pub refreshed: u64,
    pub heuristic_calls: u64,
}

impl SearchOutcome {
    pub fn goal_node(&self) -> Option<NodeId> {
        match self.result {
            SearchResult::Success(id) => Some(id),
            SearchResult::Failure => None,
        }
    }
}

/// Per-episode view of the search inputs.
pub struct SearchContext<'a> {
    pub problem: &'a GroundProblem,
    pub evaluator: &'a mut HeuristicEvaluator,
    pub counter: &'a mut CostCounter,
    pub budget: &'a mut Budget,
}

/// One search episode. Selects the open node with least `g + w·h`; a node
/// satisfying `goal` ends the search before expansion and stays in OPEN.
/// Otherwise the node is closed and its successors, in ascending action
/// order, are inserted, reopened on a cheaper path, or re-evaluated when
/// their stamp predates `iteration`. A selected dead end (f = ∞) means
/// OPEN holds nothing useful: failure.
pub fn search(
    ctx: &mut SearchContext<'_>,
    tree: &mut SearchTree,
    goal: &Goal,
    iteration: u32,
) -> Result<SearchOutcome, ResourceExceeded> {
    let problem = ctx.problem;
    let calls_before = ctx.counter.heuristic_calls();
    let mut out = SearchOutcome {
        result: SearchResult::Failure,
        expanded: 0,
        generated: 0,
        reopened: 0,
        refreshed: 0,
        heuristic_calls: 0,
    };
    let mut applicable = Vec::new();
    let result = loop {
        let Ok(id) = tree.select_min() else {
            break SearchResult::Failure;
        };
        if tree.f(id).is_infinite() {
            tree.requeue(id);
            break SearchResult::Failure;
        }
        let state = tree.state(id).clone();
        if goal_satisfied(&state, goal) {
            tree.requeue(id);
            break SearchResult::Success(id);
        }
        tree.close(id);
        ctx.counter.record_expansion();
        out.expanded += 1;
        if let Err(e) = ctx.budget.poll(tree.len(), out.expanded) {
            tree.requeue(id);
            return Err(e);
        }

        let g = tree.node(id).g;
        problem.applicable_actions(&state, &mut applicable);
        for &a in &applicable {
            let action = problem.action(a);
            let next = apply_unchecked(&state, action);
            let cost = g + action.cost;
            match tree.lookup(&next) {
                None => {
                    let h = ctx
                        .evaluator
                        .evaluate(problem, &next, &goal.props, ctx.counter);
                    tree.insert(next, cost, h, Some((id, a)), iteration);
                    out.generated += 1;
                }
                Some(nid) => {
                    let mut requeue = false;
                    if cost < tree.node(nid).g {
                        let node = tree.node_mut(nid);
                        node.g = cost;
                        node.parent = Some((id, a));
                        out.reopened += 1;
                        requeue = true;
                    }
                    if tree.node(nid).iteration < iteration {
                        let h = ctx
                            .evaluator
                            .evaluate(problem, &next, &goal.props, ctx.counter);
                        let node = tree.node_mut(nid);
                        node.h = h;
                        node.iteration = iteration;
                        out.refreshed += 1;
                        requeue = true;
                    }
                    if requeue {
                        tree.push_open(nid);
                    }
                }
            }
        }
    };
    out.result = result;
    out.heuristic_calls = ctx.counter.heuristic_calls() - calls_before;
    Ok(out)
}
