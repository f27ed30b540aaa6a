//! Delete-relaxation estimators: relaxed-plan (FF), additive, max,
//! goal-count and the blind zero heuristic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::dynamics::CostCounter;
use crate::strips::{ActionId, GroundProblem, PropId, PropSet};

/// Heuristic value in unit-cost space, or the dead-end sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HValue(u32);

impl HValue {
    pub const INFINITY: HValue = HValue(u32::MAX);
    pub const ZERO: HValue = HValue(0);

    pub fn finite(v: u32) -> Self {
        debug_assert!(v != u32::MAX);
        HValue(v)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == u32::MAX
    }

    pub fn value(self) -> Option<u32> {
        (!self.is_infinite()).then_some(self.0)
    }
}

impl fmt::Display for HValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    Ff,
    Add,
    Max,
    GoalCount,
    Zero,
}

impl HeuristicKind {
    /// Whether the estimator never overestimates under unit costs.
    pub fn is_admissible(self) -> bool {
        matches!(self, HeuristicKind::Max | HeuristicKind::Zero)
    }

    pub fn tag(self) -> &'static str {
        match self {
            HeuristicKind::Ff => "ff",
            HeuristicKind::Add => "add",
            HeuristicKind::Max => "max",
            HeuristicKind::GoalCount => "goalcount",
            HeuristicKind::Zero => "zero",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ff" => Ok(HeuristicKind::Ff),
            "add" => Ok(HeuristicKind::Add),
            "max" => Ok(HeuristicKind::Max),
            "goalcount" | "goal_count" => Ok(HeuristicKind::GoalCount),
            "zero" => Ok(HeuristicKind::Zero),
            other => Err(format!("unknown heuristic '{other}'")),
        }
    }
}

const UNREACHED: u32 = u32::MAX;

/// Scratch arrays for one in-flight relaxation. Version stamps make reset
/// O(1) per evaluation.
#[derive(Debug)]
pub struct RelaxedGraphWorkspace {
    stamp: u32,
    prop_stamp: Vec<u32>,
    prop_cost: Vec<u32>,
    action_stamp: Vec<u32>,
    unsatisfied: Vec<u32>,
    action_cost: Vec<u32>,
    queue: Vec<PropId>,
    heap: BinaryHeap<Reverse<(u32, PropId)>>,
    // relaxed-plan extraction
    subgoal_stamp: Vec<u32>,
    chosen_stamp: Vec<u32>,
    layers: Vec<Vec<PropId>>,
}

impl RelaxedGraphWorkspace {
    pub fn new(problem: &GroundProblem) -> Self {
        let np = problem.universe();
        let na = problem.actions.len();
        RelaxedGraphWorkspace {
            stamp: 0,
            prop_stamp: vec![0; np],
            prop_cost: vec![UNREACHED; np],
            action_stamp: vec![0; na],
            unsatisfied: vec![0; na],
            action_cost: vec![UNREACHED; na],
            queue: Vec::new(),
            heap: BinaryHeap::new(),
            subgoal_stamp: vec![0; np],
            chosen_stamp: vec![0; na],
            layers: Vec::new(),
        }
    }

    fn next_stamp(&mut self) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.prop_stamp.fill(0);
            self.action_stamp.fill(0);
            self.subgoal_stamp.fill(0);
            self.chosen_stamp.fill(0);
            self.stamp = 1;
        }
    }

    #[inline]
    fn prop_cost(&self, p: PropId) -> u32 {
        if self.prop_stamp[p as usize] == self.stamp {
            self.prop_cost[p as usize]
        } else {
            UNREACHED
        }
    }

    #[inline]
    fn set_prop_cost(&mut self, p: PropId, c: u32) {
        self.prop_stamp[p as usize] = self.stamp;
        self.prop_cost[p as usize] = c;
    }

    #[inline]
    fn action_cost(&self, a: ActionId) -> u32 {
        if self.action_stamp[a.index()] == self.stamp {
            self.action_cost[a.index()]
        } else {
            UNREACHED
        }
    }

    #[inline]
    fn decrement(&mut self, problem: &GroundProblem, a: ActionId) -> bool {
        let i = a.index();
        if self.action_stamp[i] != self.stamp {
            self.action_stamp[i] = self.stamp;
            self.unsatisfied[i] = problem.actions[i].pre_ids.len() as u32;
            self.action_cost[i] = UNREACHED;
        }
        self.unsatisfied[i] -= 1;
        self.unsatisfied[i] == 0
    }

    #[inline]
    fn trigger(&mut self, a: ActionId, cost: u32) {
        let i = a.index();
        self.action_stamp[i] = self.stamp;
        self.unsatisfied[i] = 0;
        self.action_cost[i] = cost;
    }

    /// Unit-cost layered reachability (h_max labels). Stops once the
    /// layer containing the last goal proposition is complete, so every
    /// action at a level below that is labelled. Returns the max goal
    /// level or `None` if a goal is unreachable.
    fn build_layers(&mut self, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> Option<u32> {
        self.queue.clear();
        for p in s.iter() {
            self.set_prop_cost(p, 0);
            self.queue.push(p);
        }
        let mut missing = g.iter().filter(|&p| !s.contains(p)).count();
        let mut goal_level = if missing == 0 { Some(0) } else { None };
        if goal_level == Some(0) {
            return Some(0);
        }
        for &a in problem.unconditional_actions() {
            self.trigger(a, 0);
            for &q in &problem.actions[a.index()].add_ids {
                if self.prop_cost(q) == UNREACHED {
                    self.set_prop_cost(q, 1);
                    self.queue.push(q);
                    if g.contains(q) {
                        missing -= 1;
                    }
                }
            }
        }
        if missing == 0 {
            goal_level = Some(1);
        }
        let mut head = 0;
        while head < self.queue.len() {
            let p = self.queue[head];
            head += 1;
            let level = self.prop_cost(p);
            if let Some(k) = goal_level {
                if level >= k {
                    break;
                }
            }
            for &a in &problem.consumers[p as usize] {
                if self.decrement(problem, a) {
                    self.action_cost[a.index()] = level;
                    for &q in &problem.actions[a.index()].add_ids {
                        if self.prop_cost(q) == UNREACHED {
                            self.set_prop_cost(q, level + 1);
                            self.queue.push(q);
                            if g.contains(q) {
                                missing -= 1;
                                if missing == 0 {
                                    goal_level = Some(level + 1);
                                }
                            }
                        }
                    }
                }
            }
        }
        goal_level
    }

    fn h_max(&mut self, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> HValue {
        match self.build_layers(problem, s, g) {
            Some(level) => HValue::finite(level),
            None => HValue::INFINITY,
        }
    }

    fn h_add(&mut self, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> HValue {
        self.heap.clear();
        for p in s.iter() {
            self.set_prop_cost(p, 0);
            self.heap.push(Reverse((0, p)));
        }
        for &a in problem.unconditional_actions() {
            let c = problem.actions[a.index()].cost;
            self.trigger(a, c);
            for &q in &problem.actions[a.index()].add_ids {
                if c < self.prop_cost(q) {
                    self.set_prop_cost(q, c);
                    self.heap.push(Reverse((c, q)));
                }
            }
        }
        let mut missing = g.iter().filter(|&p| !s.contains(p)).count();
        // settled marks reuse subgoal_stamp
        while let Some(Reverse((c, p))) = self.heap.pop() {
            if self.subgoal_stamp[p as usize] == self.stamp || c > self.prop_cost(p) {
                continue;
            }
            self.subgoal_stamp[p as usize] = self.stamp;
            if g.contains(p) && !s.contains(p) {
                missing -= 1;
                if missing == 0 {
                    break;
                }
            }
            for &a in &problem.consumers[p as usize] {
                if self.decrement(problem, a) {
                    let act = &problem.actions[a.index()];
                    let sum = act
                        .pre_ids
                        .iter()
                        .fold(act.cost, |acc, &q| acc.saturating_add(self.prop_cost(q)));
                    self.action_cost[a.index()] = sum;
                    for &q in &act.add_ids {
                        if sum < self.prop_cost(q) {
                            self.set_prop_cost(q, sum);
                            self.heap.push(Reverse((sum, q)));
                        }
                    }
                }
            }
        }
        if missing > 0 {
            return HValue::INFINITY;
        }
        let total = g
            .iter()
            .fold(0u32, |acc, p| acc.saturating_add(self.prop_cost(p)));
        HValue::finite(total.min(u32::MAX - 1))
    }

    fn h_ff(&mut self, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> HValue {
        let Some(top) = self.build_layers(problem, s, g) else {
            return HValue::INFINITY;
        };
        if top == 0 {
            return HValue::ZERO;
        }
        let top = top as usize;
        if self.layers.len() <= top {
            self.layers.resize_with(top + 1, Vec::new);
        }
        for layer in &mut self.layers[..=top] {
            layer.clear();
        }
        for p in g.iter() {
            let level = self.prop_cost(p) as usize;
            if level > 0 && self.subgoal_stamp[p as usize] != self.stamp {
                self.subgoal_stamp[p as usize] = self.stamp;
                self.layers[level].push(p);
            }
        }
        let mut chosen = 0u32;
        for level in (1..=top).rev() {
            let mut k = 0;
            while k < self.layers[level].len() {
                let q = self.layers[level][k];
                k += 1;
                // earliest achiever: action labelled level-1 adding q, lowest id
                let achiever = problem.achievers[q as usize]
                    .iter()
                    .copied()
                    .find(|&a| self.action_cost(a) == level as u32 - 1)
                    .expect("reached proposition has an achiever one level below");
                if self.chosen_stamp[achiever.index()] == self.stamp {
                    continue;
                }
                self.chosen_stamp[achiever.index()] = self.stamp;
                chosen += 1;
                for &p in &problem.actions[achiever.index()].pre_ids {
                    let pl = self.prop_cost(p) as usize;
                    if pl > 0 && self.subgoal_stamp[p as usize] != self.stamp {
                        self.subgoal_stamp[p as usize] = self.stamp;
                        self.layers[pl].push(p);
                    }
                }
            }
        }
        HValue::finite(chosen)
    }
}

/// One heuristic evaluator per run. Every call to [`evaluate`] is charged
/// to the run's cost counter.
///
/// [`evaluate`]: HeuristicEvaluator::evaluate
#[derive(Debug)]
pub struct HeuristicEvaluator {
    kind: HeuristicKind,
    workspace: RelaxedGraphWorkspace,
}

impl HeuristicEvaluator {
    pub fn new(kind: HeuristicKind, problem: &GroundProblem) -> Self {
        HeuristicEvaluator {
            kind,
            workspace: RelaxedGraphWorkspace::new(problem),
        }
    }

    pub fn kind(&self) -> HeuristicKind {
        self.kind
    }

    pub fn evaluate(
        &mut self,
        problem: &GroundProblem,
        s: &PropSet,
        g: &PropSet,
        counter: &mut CostCounter,
    ) -> HValue {
        counter.record_heuristic_call();
        self.estimate(problem, s, g)
    }

    /// Uncharged evaluation, for diagnostics and tests.
    pub fn estimate(&mut self, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> HValue {
        match self.kind {
            HeuristicKind::Zero => HValue::ZERO,
            HeuristicKind::GoalCount => HValue::finite(g.difference(s).len() as u32),
            kind => {
                self.workspace.next_stamp();
                match kind {
                    HeuristicKind::Max => self.workspace.h_max(problem, s, g),
                    HeuristicKind::Add => self.workspace.h_add(problem, s, g),
                    HeuristicKind::Ff => self.workspace.h_ff(problem, s, g),
                    _ => unreachable!(),
                }
            }
        }
    }
}

/// One-shot uncharged evaluation.
pub fn evaluate(kind: HeuristicKind, problem: &GroundProblem, s: &PropSet, g: &PropSet) -> HValue {
    HeuristicEvaluator::new(kind, problem).estimate(problem, s, g)
}
