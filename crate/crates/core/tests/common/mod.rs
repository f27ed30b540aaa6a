//! Brute-force oracles and fixtures shared by the integration tests. The
//! oracles work on plain `BTreeSet<u32>` states and never call the
//! library's transition, search or heuristic code.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::PathBuf;

use mgp_core::budget::Budget;
use mgp_core::dynamics::CostCounter;
use mgp_core::heuristics::HeuristicEvaluator;
use mgp_core::search::{search, SearchContext, SearchTree};
use mgp_core::strips::Proposition;
use mgp_core::{ActionId, Goal, GroundAction, GroundProblem, HeuristicKind, PropSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Set = BTreeSet<u32>;

pub fn benchmarks() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

pub fn load(domain: &str, problem: &str) -> GroundProblem {
    let dir = benchmarks();
    let d = std::fs::read_to_string(dir.join(domain)).unwrap();
    let p = std::fs::read_to_string(dir.join(problem)).unwrap();
    mgp_core::pddl::load(&d, &p).unwrap()
}

pub fn set_of(p: &PropSet) -> Set {
    p.iter().collect()
}

struct RawAction {
    pre: Set,
    add: Set,
    del: Set,
}

fn raw_actions(problem: &GroundProblem) -> Vec<RawAction> {
    problem
        .actions
        .iter()
        .map(|a| RawAction {
            pre: set_of(&a.pre),
            add: set_of(&a.add),
            del: set_of(&a.del),
        })
        .collect()
}

/// `(s \ del) ∪ add` when `pre ⊆ s`.
pub fn oracle_apply(s: &Set, pre: &Set, add: &Set, del: &Set) -> Option<Set> {
    if !pre.is_subset(s) {
        return None;
    }
    let mut next: Set = s.difference(del).copied().collect();
    next.extend(add.iter().copied());
    Some(next)
}

/// Breadth-first exploration from `init`. Returns the number of reachable
/// states and, when the goal is reachable, the optimal plan length.
pub fn bfs(problem: &GroundProblem) -> (usize, Option<usize>) {
    let acts = raw_actions(problem);
    let goal = set_of(&problem.goal.props);
    let init = set_of(&problem.init);
    let mut dist: HashMap<Set, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(init.clone(), 0);
    queue.push_back(init);
    let mut best = None;
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if best.is_none() && goal.is_subset(&s) {
            best = Some(d);
        }
        for a in &acts {
            if let Some(n) = oracle_apply(&s, &a.pre, &a.add, &a.del) {
                if !dist.contains_key(&n) {
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    (dist.len(), best)
}

/// All states reachable from `init`.
pub fn reachable_states(problem: &GroundProblem) -> Vec<Set> {
    let acts = raw_actions(problem);
    let init = set_of(&problem.init);
    let mut seen: BTreeSet<Set> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(init.clone());
    queue.push_back(init);
    while let Some(s) = queue.pop_front() {
        for a in &acts {
            if let Some(n) = oracle_apply(&s, &a.pre, &a.add, &a.del) {
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// Executes a plan step by step with the oracle transition.
pub fn oracle_run(problem: &GroundProblem, plan: &[ActionId]) -> Option<Set> {
    let acts = raw_actions(problem);
    let mut s = set_of(&problem.init);
    for a in plan {
        let r = &acts[a.0 as usize];
        s = oracle_apply(&s, &r.pre, &r.add, &r.del)?;
    }
    Some(s)
}

const INF: u32 = u32::MAX;

/// Relaxed costs by naive fixpoint iteration; `sum` selects additive
/// aggregation, otherwise max.
pub fn relaxed_costs(problem: &GroundProblem, s: &Set, sum: bool) -> Vec<u32> {
    let acts = raw_actions(problem);
    let mut cost = vec![INF; problem.universe()];
    for &p in s {
        cost[p as usize] = 0;
    }
    loop {
        let mut changed = false;
        for a in &acts {
            let mut c: u32 = 0;
            let mut ok = true;
            for &p in &a.pre {
                let pc = cost[p as usize];
                if pc == INF {
                    ok = false;
                    break;
                }
                c = if sum { c + pc } else { c.max(pc) };
            }
            if !ok {
                continue;
            }
            for &q in &a.add {
                if c + 1 < cost[q as usize] {
                    cost[q as usize] = c + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return cost;
        }
    }
}

pub fn oracle_hmax(problem: &GroundProblem, s: &Set, g: &Set) -> Option<u32> {
    let cost = relaxed_costs(problem, s, false);
    g.iter().try_fold(0, |m, &p| (cost[p as usize] != INF).then(|| m.max(cost[p as usize])))
}

pub fn oracle_hadd(problem: &GroundProblem, s: &Set, g: &Set) -> Option<u32> {
    let cost = relaxed_costs(problem, s, true);
    g.iter().try_fold(0, |m, &p| (cost[p as usize] != INF).then(|| m + cost[p as usize]))
}

/// Relaxed-plan size: propositions and actions get their first layer in
/// the relaxed planning graph; each open subgoal, from the top layer
/// down, is supported by its lowest-numbered achiever one layer below,
/// whose preconditions become subgoals. Distinct achievers are counted.
pub fn oracle_hff(problem: &GroundProblem, s: &Set, g: &Set) -> Option<u32> {
    let acts = raw_actions(problem);
    let level = relaxed_costs(problem, s, false);
    if g.iter().any(|&p| level[p as usize] == INF) {
        return None;
    }
    let act_level = |a: &RawAction| a.pre.iter().map(|&p| level[p as usize]).max().unwrap_or(0);
    let top = g.iter().map(|&p| level[p as usize]).max().unwrap_or(0);
    let mut goals: Vec<Set> = vec![Set::new(); top as usize + 1];
    let mut marked = Set::new();
    for &p in g {
        if level[p as usize] > 0 && marked.insert(p) {
            goals[level[p as usize] as usize].insert(p);
        }
    }
    let mut chosen = Set::new();
    for l in (1..=top as usize).rev() {
        let layer: Vec<u32> = goals[l].iter().copied().collect();
        for q in layer {
            let (id, a) = acts
                .iter()
                .enumerate()
                .find(|(_, a)| a.add.contains(&q) && a.pre.iter().all(|&p| level[p as usize] != INF) && act_level(a) == l as u32 - 1)
                .unwrap();
            if !chosen.insert(id as u32) {
                continue;
            }
            for &p in &a.pre {
                let pl = level[p as usize];
                if pl > 0 && marked.insert(p) {
                    goals[pl as usize].insert(p);
                }
            }
        }
    }
    Some(chosen.len() as u32)
}

/// One weighted A* episode from the initial state with no goal dynamics.
pub fn solve(problem: &GroundProblem, kind: HeuristicKind, w: f64) -> Option<Vec<ActionId>> {
    let mut evaluator = HeuristicEvaluator::new(kind, problem);
    let mut counter = CostCounter::default();
    let mut budget = Budget::unlimited();
    let mut tree = SearchTree::seeded(
        problem,
        problem.init.clone(),
        &problem.goal,
        1,
        w,
        &mut evaluator,
        &mut counter,
    );
    let mut ctx = SearchContext {
        problem,
        evaluator: &mut evaluator,
        counter: &mut counter,
        budget: &mut budget,
    };
    let out = search(&mut ctx, &mut tree, &problem.goal, 1).unwrap();
    out.goal_node().map(|n| tree.extract_plan(n).actions)
}

/// Random STRIPS problem over `n` propositions with `m` actions.
pub fn random_problem(seed: u64, n: usize, m: usize) -> GroundProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, k: usize| -> Vec<u32> {
        (0..k).map(|_| rng.gen_range(0..n as u32)).collect()
    };
    let actions = (0..m)
        .map(|i| {
            let np = rng.gen_range(0..=2);
            let na = rng.gen_range(1..=2);
            let nd = rng.gen_range(0..=2);
            let pre = pick(&mut rng, np);
            let add = pick(&mut rng, na);
            let del = pick(&mut rng, nd);
            GroundAction::new(format!("(a{i})"), n, pre, add, del).0
        })
        .collect();
    let init = PropSet::from_ids(n, pick(&mut rng, 2));
    let goal = PropSet::from_ids(n, pick(&mut rng, 3));
    GroundProblem::new(
        "toy",
        format!("toy-{seed}"),
        (0..n).map(|i| Proposition::new("p", &[&i.to_string()])).collect(),
        actions,
        init,
        Goal::partial(goal),
        vec![],
    )
}

/// Blocksworld with 3 to 5 blocks, Sussman, 1 and 2 ball gripper, and ten
/// solvable random toys.
pub fn small_instances() -> Vec<GroundProblem> {
    let mut out = Vec::new();
    for n in ["03", "04", "05"] {
        for k in 0..3 {
            out.push(load(
                "blocksworld/domain.pddl",
                &format!("blocksworld/bw-{n}-{k}.pddl"),
            ));
        }
    }
    out.push(load("blocksworld/domain.pddl", "blocksworld/sussman.pddl"));
    out.push(load("gripper/domain.pddl", "gripper/gripper-1.pddl"));
    out.push(load("gripper/domain.pddl", "gripper/gripper-2.pddl"));
    let mut seed = 0;
    let mut toys = 0;
    while toys < 10 {
        let p = random_problem(seed, 10, 14);
        seed += 1;
        if let (_, Some(d)) = bfs(&p) {
            if d >= 2 {
                out.push(p);
                toys += 1;
            }
        }
    }
    out
}
