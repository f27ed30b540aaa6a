//! Typed-STRIPS PDDL: parsing of domain and problem files and grounding
//! into a [`GroundProblem`](crate::strips::GroundProblem).
//!
//! The accepted fragment is `:strips` plus `:typing`: positive
//! conjunctive preconditions and goals, add/delete effects, a type
//! hierarchy, and constants. Everything else (negation, equality,
//! quantifiers, conditional effects, numeric fluents) is rejected with
//! [`ErrorKind::Unsupported`].

mod ground;
mod parse;
pub mod sexpr;

use std::fmt;

use thiserror::Error;

pub use ground::{ground, GroundOptions};
pub use parse::{
    parse_domain, parse_problem, ActionSchema, Atom, Domain, PredicateDecl, Problem, Term,
};
pub use sexpr::Pos;

use crate::strips::GroundProblem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax(String),
    Unsupported(String),
    UnknownPredicate(String),
    UnknownObject(String),
    UnknownType(String),
    UnknownVariable(String),
    Arity {
        predicate: String,
        expected: usize,
        found: usize,
    },
    Duplicate(String),
    DomainMismatch {
        expected: String,
        found: String,
    },
    CapacityExceeded {
        limit: usize,
    },
    NoActions,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ErrorKind::Unsupported(feat) => write!(f, "unsupported feature: {feat}"),
            ErrorKind::UnknownPredicate(p) => write!(f, "unknown predicate '{p}'"),
            ErrorKind::UnknownObject(o) => write!(f, "unknown object '{o}'"),
            ErrorKind::UnknownType(t) => write!(f, "unknown type '{t}'"),
            ErrorKind::UnknownVariable(v) => write!(f, "unknown variable '{v}'"),
            ErrorKind::Arity {
                predicate,
                expected,
                found,
            } => write!(
                f,
                "predicate '{predicate}' takes {expected} argument(s), found {found}"
            ),
            ErrorKind::Duplicate(what) => write!(f, "duplicate declaration of '{what}'"),
            ErrorKind::DomainMismatch { expected, found } => write!(
                f,
                "problem is for domain '{found}' but domain '{expected}' was given"
            ),
            ErrorKind::CapacityExceeded { limit } => {
                write!(f, "grounding exceeds the limit of {limit} actions")
            }
            ErrorKind::NoActions => f.write_str("grounding produced no actions"),
        }
    }
}

/// A frontend error, displayed as `line:col: message` when the location
/// is known.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct PddlError {
    pub pos: Option<Pos>,
    pub kind: ErrorKind,
}

impl PddlError {
    pub fn at(pos: Pos, kind: ErrorKind) -> Self {
        PddlError {
            pos: Some(pos),
            kind,
        }
    }

    pub fn new(kind: ErrorKind) -> Self {
        PddlError { pos: None, kind }
    }
}

impl fmt::Display for PddlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Parses and grounds a domain/problem pair with default options.
pub fn load(domain_text: &str, problem_text: &str) -> Result<GroundProblem, PddlError> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text, &domain)?;
    ground(&domain, &problem, &GroundOptions::default())
}
