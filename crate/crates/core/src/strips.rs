//! Ground STRIPS model: propositions, bitset states, actions and the
//! transition function.

use std::fmt;

use thiserror::Error;

/// Dense index of a ground proposition inside one problem.
pub type PropId = u32;

/// Index of a ground action inside [`GroundProblem::actions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub u32);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A ground atom: predicate name plus object arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Proposition {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Proposition {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// Fixed-width bitset over a problem's proposition universe.
///
/// Every set belonging to one problem has the same number of words, so
/// equality and hashing are exact and canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PropSet {
    words: Box<[u64]>,
}

impl PropSet {
    pub fn empty(universe: usize) -> Self {
        PropSet {
            words: vec![0u64; universe.div_ceil(64)].into_boxed_slice(),
        }
    }

    pub fn from_ids<I: IntoIterator<Item = PropId>>(universe: usize, ids: I) -> Self {
        let mut set = PropSet::empty(universe);
        for id in ids {
            set.insert(id);
        }
        set
    }

    /// Number of 64-bit words backing the set.
    pub fn width(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn contains(&self, id: PropId) -> bool {
        let (w, b) = (id as usize / 64, id % 64);
        self.words.get(w).is_some_and(|word| word >> b & 1 == 1)
    }

    #[inline]
    pub fn insert(&mut self, id: PropId) {
        self.words[id as usize / 64] |= 1u64 << (id % 64);
    }

    #[inline]
    pub fn remove(&mut self, id: PropId) {
        self.words[id as usize / 64] &= !(1u64 << (id % 64));
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// `self ⊆ other`.
    #[inline]
    pub fn is_subset(&self, other: &PropSet) -> bool {
        debug_assert_eq!(self.width(), other.width());
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &PropSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &PropSet) -> PropSet {
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a | b)
            .collect();
        PropSet { words }
    }

    pub fn difference(&self, other: &PropSet) -> PropSet {
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| a & !b)
            .collect();
        PropSet { words }
    }

    pub fn iter(&self) -> impl Iterator<Item = PropId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros();
                rest &= rest - 1;
                Some(wi as u32 * 64 + bit)
            })
        })
    }

    /// 64-bit digest used for tree dumps and diagnostics.
    pub fn digest(&self) -> u64 {
        // FNV-1a over the words; stable across platforms.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for w in self.words.iter() {
            for byte in w.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }

    #[inline]
    fn apply_effects(&self, add: &PropSet, del: &PropSet) -> PropSet {
        let words = self
            .words
            .iter()
            .zip(add.words.iter().zip(del.words.iter()))
            .map(|(s, (a, d))| (s & !d) | a)
            .collect();
        PropSet { words }
    }
}

impl fmt::Debug for PropSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A world state. States are immutable values; successor states are fresh
/// allocations.
pub type State = PropSet;

/// A goal condition: either the original partial goal or a complete
/// world state produced by goal evolution.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Goal {
    pub props: PropSet,
    pub complete: bool,
}

impl Goal {
    pub fn partial(props: PropSet) -> Self {
        Goal {
            props,
            complete: false,
        }
    }

    pub fn complete(state: State) -> Self {
        Goal {
            props: state,
            complete: true,
        }
    }
}

/// Ground STRIPS action with unit cost unless stated otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub pre: PropSet,
    pub add: PropSet,
    pub del: PropSet,
    pub cost: u32,
    pub(crate) pre_ids: Vec<PropId>,
    pub(crate) add_ids: Vec<PropId>,
}

impl GroundAction {
    /// Builds an action, dropping from `del` every proposition also in
    /// `add` (delete-before-add resolves such conflicts in favour of add).
    /// Returns the action and whether a conflict was normalised.
    pub fn new(
        name: impl Into<String>,
        universe: usize,
        pre: impl IntoIterator<Item = PropId>,
        add: impl IntoIterator<Item = PropId>,
        del: impl IntoIterator<Item = PropId>,
    ) -> (Self, bool) {
        let pre = PropSet::from_ids(universe, pre);
        let add = PropSet::from_ids(universe, add);
        let raw_del = PropSet::from_ids(universe, del);
        let conflict = !add.is_disjoint(&raw_del);
        let del = raw_del.difference(&add);
        let action = GroundAction {
            name: name.into(),
            pre_ids: pre.iter().collect(),
            add_ids: add.iter().collect(),
            pre,
            add,
            del,
            cost: 1,
        };
        (action, conflict)
    }

    pub fn pre_ids(&self) -> &[PropId] {
        &self.pre_ids
    }

    pub fn add_ids(&self) -> &[PropId] {
        &self.add_ids
    }
}

/// Ordered action sequence. Applicability is only checked on execution.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<ActionId>,
}

impl Plan {
    pub fn new(actions: Vec<ActionId>) -> Self {
        Plan { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

impl From<Vec<ActionId>> for Plan {
    fn from(actions: Vec<ActionId>) -> Self {
        Plan { actions }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StripsError {
    #[error("action {name} is not applicable")]
    Inapplicable { name: String },
    #[error("action {action} is not applicable at plan step {index}")]
    NotApplicable { index: usize, action: ActionId },
}

/// `pre(a) ⊆ s`.
#[inline]
pub fn applicable(s: &State, a: &GroundAction) -> bool {
    a.pre.is_subset(s)
}

/// `(s \ del(a)) ∪ add(a)`, or `NotApplicable` when `pre(a) ⊄ s`.
pub fn apply(s: &State, a: &GroundAction) -> Result<State, StripsError> {
    if !applicable(s, a) {
        return Err(StripsError::Inapplicable {
            name: a.name.clone(),
        });
    }
    Ok(apply_unchecked(s, a))
}

/// Transition without the precondition check; callers guarantee
/// applicability.
#[inline]
pub fn apply_unchecked(s: &State, a: &GroundAction) -> State {
    s.apply_effects(&a.add, &a.del)
}

#[inline]
pub fn goal_satisfied(s: &State, g: &Goal) -> bool {
    g.props.is_subset(s)
}

/// A complete problem after grounding: proposition universe, actions,
/// initial state and (partial) goal, plus lookup tables used by search
/// and the relaxation heuristics.
#[derive(Clone, Debug)]
pub struct GroundProblem {
    pub domain_name: String,
    pub problem_name: String,
    pub propositions: Vec<Proposition>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    pub goal: Goal,
    pub objects: Vec<String>,
    /// prop -> actions having it as a precondition
    pub(crate) consumers: Vec<Vec<ActionId>>,
    /// prop -> actions adding it
    pub(crate) achievers: Vec<Vec<ActionId>>,
    /// actions keyed by their first precondition; `None` bucket is
    /// precondition-free actions
    trigger: Vec<Vec<ActionId>>,
    unconditional: Vec<ActionId>,
}

impl GroundProblem {
    pub fn new(
        domain_name: impl Into<String>,
        problem_name: impl Into<String>,
        propositions: Vec<Proposition>,
        actions: Vec<GroundAction>,
        init: State,
        goal: Goal,
        objects: Vec<String>,
    ) -> Self {
        let n = propositions.len();
        let mut consumers = vec![Vec::new(); n];
        let mut achievers = vec![Vec::new(); n];
        let mut trigger = vec![Vec::new(); n];
        let mut unconditional = Vec::new();
        for (i, a) in actions.iter().enumerate() {
            let id = ActionId(i as u32);
            for &p in &a.pre_ids {
                consumers[p as usize].push(id);
            }
            for &p in &a.add_ids {
                achievers[p as usize].push(id);
            }
            match a.pre_ids.first() {
                Some(&p) => trigger[p as usize].push(id),
                None => unconditional.push(id),
            }
        }
        GroundProblem {
            domain_name: domain_name.into(),
            problem_name: problem_name.into(),
            propositions,
            actions,
            init,
            goal,
            objects,
            consumers,
            achievers,
            trigger,
            unconditional,
        }
    }

    pub fn universe(&self) -> usize {
        self.propositions.len()
    }

    #[inline]
    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.index()]
    }

    pub(crate) fn unconditional_actions(&self) -> &[ActionId] {
        &self.unconditional
    }

    /// Applicable actions in `s`, in ascending id order.
    pub fn applicable_actions(&self, s: &State, out: &mut Vec<ActionId>) {
        out.clear();
        out.extend_from_slice(&self.unconditional);
        for p in s.iter() {
            for &a in &self.trigger[p as usize] {
                if applicable(s, self.action(a)) {
                    out.push(a);
                }
            }
        }
        out.sort_unstable();
    }

    /// γ(s, π): left fold of [`apply`], reporting the first failing step.
    pub fn apply_sequence(&self, s: &State, plan: &[ActionId]) -> Result<State, StripsError> {
        let mut cur = s.clone();
        for (index, &id) in plan.iter().enumerate() {
            let a = self.action(id);
            if !applicable(&cur, a) {
                return Err(StripsError::NotApplicable { index, action: id });
            }
            cur = apply_unchecked(&cur, a);
        }
        Ok(cur)
    }

    /// True iff `plan` is executable from `s0` and ends in a state
    /// satisfying `g`.
    pub fn validate_plan(&self, s0: &State, plan: &[ActionId], g: &Goal) -> bool {
        self.apply_sequence(s0, plan)
            .is_ok_and(|end| goal_satisfied(&end, g))
    }

    pub fn format_state(&self, s: &State) -> String {
        let mut out = String::from("{");
        for (i, p) in s.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&self.propositions[p as usize].to_string());
        }
        out.push('}');
        out
    }

    pub fn format_plan(&self, plan: &[ActionId]) -> Vec<String> {
        plan.iter().map(|&a| self.action(a).name.clone()).collect()
    }
}
