//! Closed-loop agents chasing a moving goal: MGP and its delay variants,
//! SA*, and a GFRA*-style replanner.

mod baselines;
mod mgp;
pub mod trace;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

pub use baselines::{run_gfra, run_sastar};
pub use mgp::{can_delay_new_search, run_mgp, DelayDecision, PlanFollowMemo};
pub use trace::{Event, Replay, TraceError};

use crate::budget::{Budget, ClockKind, Limits, ResourceExceeded};
use crate::dynamics::{GoalDynamicsConfig, GoalEnvironment};
use crate::heuristics::{HeuristicEvaluator, HeuristicKind};
use crate::search::{SearchContext, SearchOutcome, SearchTree, TreeError};
use crate::strips::{ActionId, Goal, GroundProblem, State};
use trace::SearchEndKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SaStar,
    Gfra,
    Mgp,
    MgpOc,
    MgpPf,
    MgpOcPf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::SaStar,
        Algorithm::Gfra,
        Algorithm::Mgp,
        Algorithm::MgpOc,
        Algorithm::MgpPf,
        Algorithm::MgpOcPf,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::SaStar => "sastar",
            Algorithm::Gfra => "gfra",
            Algorithm::Mgp => "mgp",
            Algorithm::MgpOc => "mgp-oc",
            Algorithm::MgpPf => "mgp-pf",
            Algorithm::MgpOcPf => "mgp-ocpf",
        }
    }

    /// `(open_check, plan_follow)` for the MGP family.
    pub fn delay_strategies(self) -> Option<(bool, bool)> {
        match self {
            Algorithm::Mgp => Some((false, false)),
            Algorithm::MgpOc => Some((true, false)),
            Algorithm::MgpPf => Some((false, true)),
            Algorithm::MgpOcPf => Some((true, true)),
            Algorithm::SaStar | Algorithm::Gfra => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| format!("unknown algorithm '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RunStatus {
    Success,
    Failure,
    Budget,
}

impl RunStatus {
    pub fn tag(self) -> &'static str {
        match self {
            RunStatus::Success => "success",
            RunStatus::Failure => "failure",
            RunStatus::Budget => "budget",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "success" => Ok(RunStatus::Success),
            "failure" => Ok(RunStatus::Failure),
            "budget" => Ok(RunStatus::Budget),
            other => Err(format!("unknown status '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub weight: f64,
    pub delay_coef: f64,
    pub open_check: bool,
    pub plan_follow: bool,
    pub heuristic: HeuristicKind,
    pub limits: Limits,
    pub clock: ClockKind,
    /// Keep the full event log (including goal walks) in the outcome.
    pub record_trace: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            weight: 1.0,
            delay_coef: 1.2,
            open_check: true,
            plan_follow: true,
            heuristic: HeuristicKind::Ff,
            limits: Limits::unlimited(),
            clock: ClockKind::ThreadCpu,
            record_trace: false,
        }
    }
}

impl AgentConfig {
    /// Copy with the delay strategies implied by an MGP variant.
    pub fn for_algorithm(&self, alg: Algorithm) -> AgentConfig {
        let mut cfg = self.clone();
        if let Some((oc, pf)) = alg.delay_strategies() {
            cfg.open_check = oc;
            cfg.plan_follow = pf;
        }
        cfg
    }
}

/// Controller bug: the run is aborted and must not be counted.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("plan step {action} is not applicable in the current state")]
    InapplicableAction { action: ActionId },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub cpu_time: Duration,
    pub executed_actions: u64,
    pub search_episodes: u32,
    pub expansions: u64,
    pub heuristic_calls: u64,
    pub goal_changes: u64,
    /// Final value of the cost counter.
    pub t: u64,
    pub final_state: State,
    pub final_goal: Goal,
    /// Present when [`AgentConfig::record_trace`] is set.
    pub trace: Option<Vec<Event>>,
}

/// Runs `alg` once.
pub fn run(
    alg: Algorithm,
    problem: &GroundProblem,
    cfg: &AgentConfig,
    dynamics: GoalDynamicsConfig,
) -> Result<RunOutcome, AgentError> {
    let cfg = cfg.for_algorithm(alg);
    match alg {
        Algorithm::SaStar => run_sastar(problem, &cfg, dynamics),
        Algorithm::Gfra => run_gfra(problem, &cfg, dynamics),
        _ => run_mgp(problem, &cfg, dynamics),
    }
}

/// State shared by every agent loop: environment, evaluator, budget, the
/// agent's position and goal, and the event log.
pub(crate) struct Session<'p> {
    pub problem: &'p GroundProblem,
    pub env: GoalEnvironment,
    pub evaluator: HeuristicEvaluator,
    pub budget: Budget,
    pub s: State,
    pub g: Goal,
    pub episodes: u32,
    pub executed: u64,
    pub goal_changes: u64,
    events: Option<Vec<Event>>,
}

impl<'p> Session<'p> {
    pub fn new(problem: &'p GroundProblem, cfg: &AgentConfig, dynamics: GoalDynamicsConfig) -> Self {
        Session {
            problem,
            env: GoalEnvironment::new(dynamics).with_walk_recording(cfg.record_trace),
            evaluator: HeuristicEvaluator::new(cfg.heuristic, problem),
            budget: Budget::new(cfg.limits, cfg.clock),
            s: problem.init.clone(),
            g: problem.goal.clone(),
            episodes: 0,
            executed: 0,
            goal_changes: 0,
            events: cfg.record_trace.then(Vec::new),
        }
    }

    pub fn log(&mut self, e: impl FnOnce() -> Event) {
        if let Some(events) = &mut self.events {
            events.push(e());
        }
    }

    pub fn goal_reached(&self) -> bool {
        crate::strips::goal_satisfied(&self.s, &self.g)
    }

    pub fn seed_tree(&mut self, iteration: u32, weight: f64) -> SearchTree {
        SearchTree::seeded(
            self.problem,
            self.s.clone(),
            &self.g,
            iteration,
            weight,
            &mut self.evaluator,
            &mut self.env.counter,
        )
    }

    /// One Search episode with logging.
    pub fn search(
        &mut self,
        tree: &mut SearchTree,
        iteration: u32,
    ) -> Result<SearchOutcome, ResourceExceeded> {
        let t0 = self.env.counter.t();
        self.log(|| Event::SearchBegin {
            episode: iteration,
            t: t0,
        });
        self.episodes += 1;
        let mut ctx = SearchContext {
            problem: self.problem,
            evaluator: &mut self.evaluator,
            counter: &mut self.env.counter,
            budget: &mut self.budget,
        };
        let result = crate::search::search(&mut ctx, tree, &self.g, iteration);
        let t = self.env.counter.t();
        match &result {
            Ok(out) => self.log(|| Event::SearchEnd {
                episode: iteration,
                result: if out.goal_node().is_some() {
                    SearchEndKind::Success
                } else {
                    SearchEndKind::Failure
                },
                expanded: out.expanded,
                generated: out.generated,
                heuristic_calls: out.heuristic_calls,
                t,
            }),
            Err(_) => self.log(|| Event::SearchEnd {
                episode: iteration,
                result: SearchEndKind::Budget,
                expanded: 0,
                generated: 0,
                heuristic_calls: 0,
                t,
            }),
        }
        result
    }

    /// Installs the evolving goal after the first successful search.
    pub fn install_goal(&mut self, solution: &State) {
        if let Some(goal) = self.env.install_initial_goal(solution) {
            self.log(|| Event::GoalInstall {
                props: goal.props.iter().collect(),
            });
            self.g = goal;
        }
    }

    /// Executes `a` and runs the UpdateGoal checkpoint. Returns true when
    /// the goal changed.
    pub fn execute(&mut self, a: ActionId) -> Result<bool, AgentError> {
        let action = self.problem.action(a);
        if !crate::strips::applicable(&self.s, action) {
            return Err(AgentError::InapplicableAction { action: a });
        }
        self.s = crate::strips::apply_unchecked(&self.s, action);
        self.executed += 1;
        let t = self.env.counter.t();
        self.log(|| Event::Exec { t, action: a });
        match self.env.update_goal(self.problem, &mut self.g) {
            Some(change) => {
                self.goal_changes += 1;
                self.log(|| Event::GoalChange {
                    t: change.t,
                    steps: change.steps,
                    actions: change.walk,
                });
                Ok(true)
            }
            None => Ok(false),
        }
    }

    pub fn finish(mut self, status: RunStatus) -> RunOutcome {
        self.log(|| Event::Status(status));
        let mut cpu_time = self.budget.elapsed();
        let status = match (status, self.budget.limits().cpu_time) {
            (RunStatus::Success, Some(cap)) if self.budget.clock() != ClockKind::Disabled && cpu_time > cap => {
                if let Some(Event::Status(s)) = self.events.as_mut().and_then(|e| e.last_mut()) {
                    *s = RunStatus::Budget;
                }
                RunStatus::Budget
            }
            _ => status,
        };
        if self.budget.clock() == ClockKind::Disabled {
            cpu_time = Duration::ZERO;
        }
        RunOutcome {
            status,
            cpu_time,
            executed_actions: self.executed,
            search_episodes: self.episodes,
            expansions: self.env.counter.expansions(),
            heuristic_calls: self.env.counter.heuristic_calls(),
            goal_changes: self.goal_changes,
            t: self.env.counter.t(),
            final_state: self.s,
            final_goal: self.g,
            trace: self.events,
        }
    }
}

/// `Err(budget)` maps to a finished run with budget status.
macro_rules! try_budget {
    ($session:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err($crate::budget::ResourceExceeded(_)) => {
                return Ok($session.finish($crate::agent::RunStatus::Budget))
            }
        }
    };
}
pub(crate) use try_budget;
