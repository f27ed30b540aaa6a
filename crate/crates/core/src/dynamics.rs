//! Moving-goal environment.
//!
//! Goal motion is driven by a machine-independent cost counter `t` rather
//! than wall-clock time: every state expansion and every heuristic call
//! increments `t`, and every `g_r` units of `t` buy the goal one random
//! transition through an applicable action. The generator is ChaCha8,
//! seeded from a 64-bit value, so trajectories are identical across
//! platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::strips::{apply_unchecked, ActionId, Goal, GroundProblem, State};

/// Cost counter `t` and its value `t_p` at the last goal update.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostCounter {
    t: u64,
    t_p: u64,
    expansions: u64,
    heuristic_calls: u64,
}

impl CostCounter {
    #[inline]
    pub fn record_expansion(&mut self) {
        self.t += 1;
        self.expansions += 1;
    }

    #[inline]
    pub fn record_heuristic_call(&mut self) {
        self.t += 1;
        self.heuristic_calls += 1;
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn t_p(&self) -> u64 {
        self.t_p
    }

    pub fn expansions(&self) -> u64 {
        self.expansions
    }

    pub fn heuristic_calls(&self) -> u64 {
        self.heuristic_calls
    }
}

/// `floor((t - t_p) / g_r)`.
pub fn steps_due(counter: &CostCounter, goal_rate: u64) -> u64 {
    assert!(goal_rate >= 1, "goal evolution rate must be >= 1");
    (counter.t - counter.t_p) / goal_rate
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GoalDynamicsConfig {
    /// Counter units per goal mutation step (`g_r`).
    pub goal_rate: u64,
    pub seed: u64,
    pub enabled: bool,
}

impl GoalDynamicsConfig {
    pub fn new(goal_rate: u64, seed: u64) -> Self {
        GoalDynamicsConfig {
            goal_rate: goal_rate.max(1),
            seed,
            enabled: true,
        }
    }

    pub fn disabled() -> Self {
        GoalDynamicsConfig {
            goal_rate: 1,
            seed: 0,
            enabled: false,
        }
    }
}

/// Outcome of one materialised goal update.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalChange {
    /// Counter value when the change was applied.
    pub t: u64,
    /// Mutation steps applied.
    pub steps: u64,
    /// Action applied at each step (`None` when the goal state had no
    /// applicable action). Empty unless walk recording is on.
    pub walk: Vec<Option<ActionId>>,
}

/// The per-run goal environment. Owns the cost counter and the RNG.
#[derive(Debug)]
pub struct GoalEnvironment {
    config: GoalDynamicsConfig,
    rng: ChaCha8Rng,
    pub counter: CostCounter,
    installed: bool,
    record_walk: bool,
    stalled_steps: u64,
    scratch: Vec<ActionId>,
}

impl GoalEnvironment {
    pub fn new(config: GoalDynamicsConfig) -> Self {
        GoalEnvironment {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            counter: CostCounter::default(),
            installed: false,
            record_walk: false,
            stalled_steps: 0,
            scratch: Vec::new(),
        }
    }

    /// Keep the per-step action list in every [`GoalChange`].
    pub fn with_walk_recording(mut self, on: bool) -> Self {
        self.record_walk = on;
        self
    }

    pub fn config(&self) -> &GoalDynamicsConfig {
        &self.config
    }

    pub fn is_active(&self) -> bool {
        self.config.enabled && self.installed
    }

    pub fn stalled_steps(&self) -> u64 {
        self.stalled_steps
    }

    /// Installs the first search's solution state as the evolving goal.
    /// With evolution disabled the original goal is kept and `None` is
    /// returned. `t_p` is left untouched, so the counter accrued by the
    /// first search is paid out at the next update.
    pub fn install_initial_goal(&mut self, solution_state: &State) -> Option<Goal> {
        if !self.config.enabled || self.installed {
            return None;
        }
        self.installed = true;
        Some(Goal::complete(solution_state.clone()))
    }

    /// UpdateGoal checkpoint: applies every mutation step due since the
    /// last update. The remainder of `(t - t_p)` carries over.
    pub fn update_goal(&mut self, problem: &GroundProblem, goal: &mut Goal) -> Option<GoalChange> {
        if !self.is_active() {
            return None;
        }
        let n = steps_due(&self.counter, self.config.goal_rate);
        if n == 0 {
            return None;
        }
        self.counter.t_p += n * self.config.goal_rate;
        let mut walk = Vec::new();
        let next = self.evolve(&goal.props, n, problem, &mut walk);
        *goal = Goal::complete(next);
        Some(GoalChange {
            t: self.counter.t,
            steps: n,
            walk,
        })
    }

    /// `n` uniformly random transitions from `goal`.
    fn evolve(
        &mut self,
        goal: &State,
        n: u64,
        problem: &GroundProblem,
        walk: &mut Vec<Option<ActionId>>,
    ) -> State {
        evolve_with(&mut self.rng, goal, n, problem, &mut self.scratch, |step| {
            if step.is_none() {
                self.stalled_steps += 1;
            }
            if self.record_walk {
                walk.push(step);
            }
        })
    }
}

/// Random walk of `n` steps through applicable actions. `on_step` sees the
/// chosen action, or `None` for a step where nothing was applicable.
pub fn evolve_with<R: Rng>(
    rng: &mut R,
    goal: &State,
    n: u64,
    problem: &GroundProblem,
    scratch: &mut Vec<ActionId>,
    mut on_step: impl FnMut(Option<ActionId>),
) -> State {
    let mut cur = goal.clone();
    for _ in 0..n {
        problem.applicable_actions(&cur, scratch);
        if scratch.is_empty() {
            on_step(None);
            continue;
        }
        let a = scratch[rng.gen_range(0..scratch.len())];
        cur = apply_unchecked(&cur, problem.action(a));
        on_step(Some(a));
    }
    cur
}

/// Convenience form of [`evolve_with`] returning the visited actions.
pub fn evolve<R: Rng>(
    goal: &Goal,
    n: u64,
    problem: &GroundProblem,
    rng: &mut R,
) -> (Goal, Vec<Option<ActionId>>) {
    assert!(goal.complete, "only complete goal states evolve");
    let mut walk = Vec::new();
    let mut scratch = Vec::new();
    let next = evolve_with(rng, &goal.props, n, problem, &mut scratch, |a| walk.push(a));
    (Goal::complete(next), walk)
}
