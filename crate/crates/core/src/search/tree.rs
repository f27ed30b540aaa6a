//! OPEN/CLOSED search tree shared across search episodes.
//!
//! Nodes live in an insertion-ordered map keyed by state, so a node id is
//! its insertion rank. OPEN is a binary heap with lazy deletion: an entry
//! is live only while its node is open and the entry's sequence number
//! matches the node's latest push.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use indexmap::IndexMap;
use thiserror::Error;

use crate::dynamics::CostCounter;
use crate::heuristics::{HValue, HeuristicEvaluator};
use crate::strips::{goal_satisfied, ActionId, Goal, GroundProblem, Plan, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Closed,
}

#[derive(Clone, Debug)]
pub struct SearchNode {
    pub g: u32,
    pub h: HValue,
    pub parent: Option<(NodeId, ActionId)>,
    pub iteration: u32,
    pub status: NodeStatus,
    open_seq: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("OPEN is empty")]
    EmptyOpen,
    #[error("state is not stored in the search tree")]
    StateNotInTree,
}

#[derive(Clone, Copy, Debug)]
struct OpenEntry {
    f: f64,
    g: u32,
    seq: u64,
    node: NodeId,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // max-heap: lowest f, then highest g, then earliest push
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.cmp(&other.g))
            .then(other.seq.cmp(&self.seq))
    }
}

/// `g + w·h`, with dead ends pinned at +∞ (no arithmetic on the sentinel).
#[inline]
pub fn priority(g: u32, h: HValue, weight: f64) -> f64 {
    match h.value() {
        Some(h) => g as f64 + weight * h as f64,
        None => f64::INFINITY,
    }
}

#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: IndexMap<State, SearchNode>,
    open: BinaryHeap<OpenEntry>,
    open_count: usize,
    root: NodeId,
    weight: f64,
    next_seq: u64,
}

impl SearchTree {
    /// A tree holding only `root_state` as an open node with `g = 0`.
    pub fn new(root_state: State, h: HValue, iteration: u32, weight: f64) -> Self {
        assert!(weight >= 1.0, "heuristic weight must be >= 1");
        let mut tree = SearchTree {
            nodes: IndexMap::new(),
            open: BinaryHeap::new(),
            open_count: 0,
            root: NodeId(0),
            weight,
            next_seq: 0,
        };
        tree.insert(root_state, 0, h, None, iteration);
        tree
    }

    /// Seeds a tree at `root_state`, charging one heuristic call.
    pub fn seeded(
        problem: &GroundProblem,
        root_state: State,
        goal: &Goal,
        iteration: u32,
        weight: f64,
        evaluator: &mut HeuristicEvaluator,
        counter: &mut CostCounter,
    ) -> Self {
        let h = evaluator.evaluate(problem, &root_state, &goal.props, counter);
        SearchTree::new(root_state, h, iteration, weight)
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn open_len(&self) -> usize {
        self.open_count
    }

    pub fn closed_len(&self) -> usize {
        self.nodes.len() - self.open_count
    }

    pub fn lookup(&self, state: &State) -> Option<NodeId> {
        self.nodes.get_index_of(state).map(|i| NodeId(i as u32))
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id.index()]
    }

    pub fn state(&self, id: NodeId) -> &State {
        self.nodes.get_index(id.index()).expect("node id in range").0
    }

    pub fn f(&self, id: NodeId) -> f64 {
        let n = self.node(id);
        priority(n.g, n.h, self.weight)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &State, &SearchNode)> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, (s, n))| (NodeId(i as u32), s, n))
    }

    /// Adds a new open node. The state must not already be stored.
    pub fn insert(
        &mut self,
        state: State,
        g: u32,
        h: HValue,
        parent: Option<(NodeId, ActionId)>,
        iteration: u32,
    ) -> NodeId {
        let node = SearchNode {
            g,
            h,
            parent,
            iteration,
            status: NodeStatus::Closed,
            open_seq: 0,
        };
        let (index, previous) = self.nodes.insert_full(state, node);
        debug_assert!(previous.is_none(), "state inserted twice");
        let id = NodeId(index as u32);
        self.push_open(id);
        id
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id.index()]
    }

    /// Marks the node open and (re)queues it at its current priority.
    pub fn push_open(&mut self, id: NodeId) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let weight = self.weight;
        let node = &mut self.nodes[id.index()];
        if node.status == NodeStatus::Closed {
            self.open_count += 1;
        }
        node.status = NodeStatus::Open;
        node.open_seq = seq;
        self.open.push(OpenEntry {
            f: priority(node.g, node.h, weight),
            g: node.g,
            seq,
            node: id,
        });
    }

    /// Moves an open node to CLOSED.
    pub fn close(&mut self, id: NodeId) {
        let node = &mut self.nodes[id.index()];
        if node.status == NodeStatus::Open {
            node.status = NodeStatus::Closed;
            self.open_count -= 1;
        }
    }

    fn entry_is_live(&self, e: &OpenEntry) -> bool {
        let n = &self.nodes[e.node.index()];
        n.status == NodeStatus::Open && n.open_seq == e.seq
    }

    /// Removes and returns the open node minimising `g + w·h` (ties: larger
    /// `g`, then first pushed). The node keeps its OPEN status until
    /// [`close`](Self::close) is called.
    pub fn select_min(&mut self) -> Result<NodeId, TreeError> {
        while let Some(e) = self.open.pop() {
            if self.entry_is_live(&e) {
                // stale copies of this node may remain; invalidate them
                self.nodes[e.node.index()].open_seq = u64::MAX;
                return Ok(e.node);
            }
        }
        Err(TreeError::EmptyOpen)
    }

    /// Puts a node returned by `select_min` back into OPEN unchanged.
    pub fn requeue(&mut self, id: NodeId) {
        self.close(id);
        self.push_open(id);
    }

    /// Actions along the root → `id` parent chain, root first.
    pub fn extract_plan(&self, id: NodeId) -> Plan {
        let mut actions = Vec::new();
        let mut cur = id;
        while let Some((parent, action)) = self.node(cur).parent {
            actions.push(action);
            cur = parent;
        }
        debug_assert_eq!(cur, self.root, "parent chain must end at the root");
        actions.reverse();
        Plan::new(actions)
    }

    /// Some stored node satisfying `goal`, searching CLOSED then OPEN.
    /// Among matches the lowest `g` wins, then the earliest inserted.
    /// Complete goals are a single identity lookup.
    pub fn contains_goal(&self, goal: &Goal) -> Option<NodeId> {
        if goal.complete {
            return self.lookup(&goal.props);
        }
        self.best_match(goal, |_| true)
    }

    /// Like [`contains_goal`](Self::contains_goal) but restricted to CLOSED.
    pub fn contains_goal_closed(&self, goal: &Goal) -> Option<NodeId> {
        if goal.complete {
            return self
                .lookup(&goal.props)
                .filter(|&id| self.node(id).status == NodeStatus::Closed);
        }
        self.best_match(goal, |n| n.status == NodeStatus::Closed)
    }

    fn best_match(&self, goal: &Goal, keep: impl Fn(&SearchNode) -> bool) -> Option<NodeId> {
        let mut best: Option<(u32, NodeId)> = None;
        for (id, state, node) in self.iter() {
            if keep(node) && goal_satisfied(state, goal) && best.is_none_or(|(g, _)| node.g < g) {
                best = Some((node.g, id));
            }
        }
        best.map(|(_, id)| id)
    }

    /// Re-roots the tree at `state`, dropping every node outside its
    /// subtree. g-values are kept as they are.
    pub fn delete_states_out_of_tree(&mut self, state: &State) -> Result<(), TreeError> {
        let new_root = self.lookup(state).ok_or(TreeError::StateNotInTree)?;
        if new_root == self.root {
            return Ok(());
        }
        let keep = self.subtree_mask(new_root);
        self.retain_mask(&keep);
        let root = self.lookup(state).expect("new root retained");
        self.root = root;
        self.nodes[root.index()].parent = None;
        Ok(())
    }

    /// Membership mask of the subtree under `top` (parent-inverse
    /// reachability).
    fn subtree_mask(&self, top: NodeId) -> Vec<bool> {
        let n = self.nodes.len();
        // children adjacency in CSR form
        let mut counts = vec![0u32; n + 1];
        for node in self.nodes.values() {
            if let Some((p, _)) = node.parent {
                counts[p.index() + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut children = vec![0u32; counts[n] as usize];
        for (i, node) in self.nodes.values().enumerate() {
            if let Some((p, _)) = node.parent {
                children[fill[p.index()] as usize] = i as u32;
                fill[p.index()] += 1;
            }
        }
        let mut keep = vec![false; n];
        let mut stack = vec![top.0];
        keep[top.index()] = true;
        while let Some(v) = stack.pop() {
            let (a, b) = (counts[v as usize] as usize, counts[v as usize + 1] as usize);
            for &c in &children[a..b] {
                if !keep[c as usize] {
                    keep[c as usize] = true;
                    stack.push(c);
                }
            }
        }
        keep
    }

    fn retain_mask(&mut self, keep: &[bool]) {
        let mut remap = vec![u32::MAX; keep.len()];
        let mut next = 0u32;
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = next;
                next += 1;
            }
        }
        let mut index = 0;
        self.nodes.retain(|_, _| {
            let k = keep[index];
            index += 1;
            k
        });
        for node in self.nodes.values_mut() {
            if let Some((p, a)) = node.parent {
                let np = remap[p.index()];
                node.parent = (np != u32::MAX).then_some((NodeId(np), a));
            }
        }
        self.rebuild_open();
    }

    /// Rebuilds the heap from node statuses, keeping each open node's
    /// original push order.
    pub fn rebuild_open(&mut self) {
        let weight = self.weight;
        self.open = self
            .nodes
            .values()
            .enumerate()
            .filter(|(_, n)| n.status == NodeStatus::Open)
            .map(|(i, n)| OpenEntry {
                f: priority(n.g, n.h, weight),
                g: n.g,
                seq: n.open_seq,
                node: NodeId(i as u32),
            })
            .collect();
        self.open_count = self.open.len();
    }

    /// Conservative goal-change update: every OPEN node moves to CLOSED
    /// with its stale estimate, and OPEN is re-seeded with `state` alone,
    /// freshly evaluated against `goal` and stamped `iteration`. Exactly
    /// one heuristic call. If `state` is not stored the tree restarts
    /// from it.
    pub fn update_search_tree(
        &mut self,
        problem: &GroundProblem,
        state: &State,
        goal: &Goal,
        iteration: u32,
        evaluator: &mut HeuristicEvaluator,
        counter: &mut CostCounter,
    ) {
        for node in self.nodes.values_mut() {
            node.status = NodeStatus::Closed;
        }
        self.open.clear();
        self.open_count = 0;
        let h = evaluator.evaluate(problem, state, &goal.props, counter);
        match self.lookup(state) {
            Some(id) => {
                let node = &mut self.nodes[id.index()];
                node.h = h;
                node.iteration = iteration;
                self.push_open(id);
            }
            None => {
                self.nodes.clear();
                self.next_seq = 0;
                self.root = self.insert(state.clone(), 0, h, None, iteration);
            }
        }
    }

    /// Full refresh: re-evaluates every stored node against `goal`, one
    /// heuristic call each, and rebuilds OPEN priorities. Returns the
    /// number of nodes refreshed.
    pub fn refresh_all(
        &mut self,
        problem: &GroundProblem,
        goal: &Goal,
        iteration: u32,
        evaluator: &mut HeuristicEvaluator,
        counter: &mut CostCounter,
    ) -> usize {
        for (state, node) in self.nodes.iter_mut() {
            node.h = evaluator.evaluate(problem, state, &goal.props, counter);
            node.iteration = iteration;
        }
        self.rebuild_open();
        self.nodes.len()
    }

    /// Reopens every CLOSED node with a successor that is no longer
    /// stored (its subtree was pruned away), so that search can reach
    /// the pruned region again. Returns the number of reopened nodes.
    pub fn retrieve_fringe(&mut self, problem: &GroundProblem) -> usize {
        let mut scratch = Vec::new();
        let mut reopen = Vec::new();
        for (id, state, node) in self.iter() {
            if node.status != NodeStatus::Closed {
                continue;
            }
            problem.applicable_actions(state, &mut scratch);
            let escapes = scratch.iter().any(|&a| {
                let next = crate::strips::apply_unchecked(state, problem.action(a));
                self.lookup(&next).is_none()
            });
            if escapes {
                reopen.push(id);
            }
        }
        for &id in &reopen {
            self.push_open(id);
        }
        reopen.len()
    }

    /// Approximate bytes per stored node, for node-count memory caps.
    pub fn node_footprint(universe: usize) -> usize {
        let state_bytes = universe.div_ceil(64) * 8;
        // index map entry + hash slot + node + boxed state + heap entry
        std::mem::size_of::<(State, SearchNode)>()
            + std::mem::size_of::<u64>() * 2
            + state_bytes
            + std::mem::size_of::<OpenEntry>()
    }

    /// Line-oriented dump: `id hash g h iteration parent status`.
    pub fn dump(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "# root={} weight={}", self.root.0, self.weight)?;
        for (id, state, n) in self.iter() {
            let parent = match n.parent {
                Some((p, a)) => format!("{}:{}", p.0, a.0),
                None => "-".to_string(),
            };
            let status = match n.status {
                NodeStatus::Open => "open",
                NodeStatus::Closed => "closed",
            };
            writeln!(
                out,
                "{} {:016x} g={} h={} iter={} parent={} {}",
                id.0,
                state.digest(),
                n.g,
                n.h,
                n.iteration,
                parent,
                status
            )?;
        }
        Ok(())
    }
}
