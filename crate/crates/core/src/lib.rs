//! STRIPS planning under moving goals.
//!
//! The crate covers the whole pipeline of a closed-loop planning agent:
//! a typed-STRIPS PDDL frontend, delete-relaxation heuristics, a reusable
//! weighted A* search tree, a randomised goal-evolution environment, and
//! the agents themselves (MGP with Open-Check and Plan-Follow delays,
//! SA*, and a GFRA*-style replanner).

pub mod agent;
pub mod budget;
pub mod dynamics;
pub mod heuristics;
pub mod pddl;
pub mod search;
pub mod strips;

pub use heuristics::{HValue, HeuristicKind};
pub use strips::{ActionId, Goal, GroundAction, GroundProblem, Plan, PropSet, State};
