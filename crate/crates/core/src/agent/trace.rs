//! Line-oriented agent event log and its replay validator.
//!
//! ```text
//! SEARCH-BEGIN i=1 t=0
//! SEARCH-END i=1 result=success expanded=12 generated=40 heuristic_calls=40 t=53
//! GOAL-INSTALL props=0,4,9
//! EXEC t=53 action=17
//! GOAL-CHANGE t=53 n=3 actions=4,_,8
//! DELAY kind=oc
//! UPDATE kind=conservative heuristic_calls=1
//! STATUS success
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::RunStatus;
use crate::strips::{applicable, apply_unchecked, goal_satisfied, ActionId, Goal, GroundProblem, PropSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchEndKind {
    Success,
    Failure,
    Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DelayKind {
    /// goal found among stored nodes (OPEN or CLOSED)
    OpenCheck,
    /// goal found among CLOSED nodes only
    Closed,
    PlanFollow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateKind {
    /// OPEN merged into CLOSED, current state re-seeded
    Conservative,
    /// every stored node re-evaluated
    Full,
    /// tree discarded and rebuilt from the current state
    Fresh,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    SearchBegin {
        episode: u32,
        t: u64,
    },
    SearchEnd {
        episode: u32,
        result: SearchEndKind,
        expanded: u64,
        generated: u64,
        heuristic_calls: u64,
        t: u64,
    },
    GoalInstall {
        props: Vec<u32>,
    },
    GoalChange {
        t: u64,
        steps: u64,
        actions: Vec<Option<ActionId>>,
    },
    Exec {
        t: u64,
        action: ActionId,
    },
    Delay {
        kind: DelayKind,
    },
    Update {
        kind: UpdateKind,
        heuristic_calls: u64,
    },
    Status(RunStatus),
}

impl SearchEndKind {
    fn tag(self) -> &'static str {
        match self {
            SearchEndKind::Success => "success",
            SearchEndKind::Failure => "failure",
            SearchEndKind::Budget => "budget",
        }
    }
}

impl DelayKind {
    fn tag(self) -> &'static str {
        match self {
            DelayKind::OpenCheck => "oc",
            DelayKind::Closed => "closed",
            DelayKind::PlanFollow => "pf",
        }
    }
}

impl UpdateKind {
    fn tag(self) -> &'static str {
        match self {
            UpdateKind::Conservative => "conservative",
            UpdateKind::Full => "full",
            UpdateKind::Fresh => "fresh",
        }
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    if items.is_empty() {
        return "-".to_string();
    }
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::SearchBegin { episode, t } => write!(f, "SEARCH-BEGIN i={episode} t={t}"),
            Event::SearchEnd {
                episode,
                result,
                expanded,
                generated,
                heuristic_calls,
                t,
            } => write!(
                f,
                "SEARCH-END i={episode} result={} expanded={expanded} generated={generated} heuristic_calls={heuristic_calls} t={t}",
                result.tag()
            ),
            Event::GoalInstall { props } => {
                write!(f, "GOAL-INSTALL props={}", join(props, |p| p.to_string()))
            }
            Event::GoalChange { t, steps, actions } => write!(
                f,
                "GOAL-CHANGE t={t} n={steps} actions={}",
                join(actions, |a| match a {
                    Some(a) => a.0.to_string(),
                    None => "_".to_string(),
                })
            ),
            Event::Exec { t, action } => write!(f, "EXEC t={t} action={}", action.0),
            Event::Delay { kind } => write!(f, "DELAY kind={}", kind.tag()),
            Event::Update {
                kind,
                heuristic_calls,
            } => write!(f, "UPDATE kind={} heuristic_calls={heuristic_calls}", kind.tag()),
            Event::Status(s) => write!(f, "STATUS {s}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("event {index}: {message}")]
    Replay { index: usize, message: String },
}

fn field<'a>(parts: &[&'a str], key: &str) -> Result<&'a str, String> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| format!("missing field '{key}'"))
}

fn num<T: FromStr>(parts: &[&str], key: &str) -> Result<T, String> {
    let v = field(parts, key)?;
    v.parse().map_err(|_| format!("bad value '{v}' for '{key}'"))
}

fn list<T>(v: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    if v == "-" {
        return Ok(Vec::new());
    }
    v.split(',').map(item).collect()
}

fn parse_u32(s: &str) -> Result<u32, String> {
    s.parse().map_err(|_| format!("bad id '{s}'"))
}

impl FromStr for Event {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, String> {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let (&tag, rest) = parts.split_first().ok_or("empty line")?;
        Ok(match tag {
            "SEARCH-BEGIN" => Event::SearchBegin {
                episode: num(rest, "i")?,
                t: num(rest, "t")?,
            },
            "SEARCH-END" => Event::SearchEnd {
                episode: num(rest, "i")?,
                result: match field(rest, "result")? {
                    "success" => SearchEndKind::Success,
                    "failure" => SearchEndKind::Failure,
                    "budget" => SearchEndKind::Budget,
                    other => return Err(format!("bad search result '{other}'")),
                },
                expanded: num(rest, "expanded")?,
                generated: num(rest, "generated")?,
                heuristic_calls: num(rest, "heuristic_calls")?,
                t: num(rest, "t")?,
            },
            "GOAL-INSTALL" => Event::GoalInstall {
                props: list(field(rest, "props")?, parse_u32)?,
            },
            "GOAL-CHANGE" => Event::GoalChange {
                t: num(rest, "t")?,
                steps: num(rest, "n")?,
                actions: list(field(rest, "actions")?, |s| {
                    if s == "_" {
                        Ok(None)
                    } else {
                        parse_u32(s).map(|a| Some(ActionId(a)))
                    }
                })?,
            },
            "EXEC" => Event::Exec {
                t: num(rest, "t")?,
                action: ActionId(num(rest, "action")?),
            },
            "DELAY" => Event::Delay {
                kind: match field(rest, "kind")? {
                    "oc" => DelayKind::OpenCheck,
                    "closed" => DelayKind::Closed,
                    "pf" => DelayKind::PlanFollow,
                    other => return Err(format!("bad delay kind '{other}'")),
                },
            },
            "UPDATE" => Event::Update {
                kind: match field(rest, "kind")? {
                    "conservative" => UpdateKind::Conservative,
                    "full" => UpdateKind::Full,
                    "fresh" => UpdateKind::Fresh,
                    other => return Err(format!("bad update kind '{other}'")),
                },
                heuristic_calls: num(rest, "heuristic_calls")?,
            },
            "STATUS" => Event::Status(rest.first().ok_or("missing status")?.parse()?),
            other => return Err(format!("unknown event '{other}'")),
        })
    }
}

/// Writes one event per line.
pub fn write_trace(out: &mut impl std::io::Write, events: &[Event]) -> std::io::Result<()> {
    for e in events {
        writeln!(out, "{e}")?;
    }
    Ok(())
}

/// Parses a trace, skipping blank lines and `#` comments.
pub fn parse_trace(text: &str) -> Result<Vec<Event>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.parse().map_err(|message| TraceError::Parse {
                line: i + 1,
                message,
            })
        })
        .collect()
}

/// Summary of a successful replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub final_state: PropSet,
    pub final_goal: Goal,
    pub executed: usize,
    pub goal_changes: usize,
    pub status: Option<RunStatus>,
}

/// Replays a trace from the problem's initial state: every executed action
/// must be applicable, every goal change must follow its logged walk
/// through applicable actions, and a `STATUS success` must end in a state
/// satisfying the goal in force at that point.
pub fn replay(problem: &GroundProblem, events: &[Event]) -> Result<Replay, TraceError> {
    let mut s = problem.init.clone();
    let mut g = problem.goal.clone();
    let mut executed = 0;
    let mut goal_changes = 0;
    let mut status = None;
    let err = |index: usize, message: String| TraceError::Replay { index, message };
    let check_action = |index: usize, a: ActionId| {
        if a.index() >= problem.actions.len() {
            Err(err(index, format!("action id {} out of range", a.0)))
        } else {
            Ok(problem.action(a))
        }
    };
    for (index, e) in events.iter().enumerate() {
        if status.is_some() {
            return Err(err(index, "event after STATUS".into()));
        }
        match e {
            Event::GoalInstall { props } => {
                if props.iter().any(|&p| p as usize >= problem.universe()) {
                    return Err(err(index, "installed goal outside the universe".into()));
                }
                let state = PropSet::from_ids(problem.universe(), props.iter().copied());
                if !goal_satisfied(&state, &problem.goal) {
                    return Err(err(index, "installed goal does not satisfy the original goal".into()));
                }
                g = Goal::complete(state);
            }
            Event::GoalChange { steps, actions, .. } => {
                if !g.complete {
                    return Err(err(index, "goal change before installation".into()));
                }
                if actions.len() as u64 != *steps {
                    return Err(err(index, format!("{steps} steps but {} actions", actions.len())));
                }
                let mut cur = g.props.clone();
                for a in actions {
                    match a {
                        Some(a) => {
                            let act = check_action(index, *a)?;
                            if !applicable(&cur, act) {
                                return Err(err(index, format!("goal walk action {} not applicable", a.0)));
                            }
                            cur = apply_unchecked(&cur, act);
                        }
                        None => {
                            let mut scratch = Vec::new();
                            problem.applicable_actions(&cur, &mut scratch);
                            if !scratch.is_empty() {
                                return Err(err(index, "stalled goal step with applicable actions".into()));
                            }
                        }
                    }
                }
                g = Goal::complete(cur);
                goal_changes += 1;
            }
            Event::Exec { action, .. } => {
                let act = check_action(index, *action)?;
                if !applicable(&s, act) {
                    return Err(err(index, format!("executed action {} not applicable", action.0)));
                }
                s = apply_unchecked(&s, act);
                executed += 1;
            }
            Event::Status(st) => {
                if *st == RunStatus::Success && !goal_satisfied(&s, &g) {
                    return Err(err(index, "success reported but goal not satisfied".into()));
                }
                status = Some(*st);
            }
            Event::SearchBegin { .. }
            | Event::SearchEnd { .. }
            | Event::Delay { .. }
            | Event::Update { .. } => {}
        }
    }
    Ok(Replay {
        final_state: s,
        final_goal: g,
        executed,
        goal_changes,
        status,
    })
}
