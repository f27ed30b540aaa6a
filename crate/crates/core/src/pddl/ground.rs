//! Grounding: type-respecting enumeration of schema bindings.

use std::collections::{HashMap, HashSet};

use super::parse::{Atom, Domain, GroundAtom, Problem, Term};
use super::{ErrorKind, PddlError};
use crate::strips::{Goal, GroundAction, GroundProblem, PropId, PropSet, Proposition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundOptions {
    pub max_actions: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_actions: 2_000_000,
        }
    }
}

type Key = (usize, Vec<usize>);

struct RawAction {
    schema: usize,
    binding: Vec<usize>,
    pre: Vec<Key>,
    add: Vec<Key>,
    del: Vec<Key>,
}

fn instantiate(atom: &Atom, binding: &[usize]) -> Key {
    let args = atom
        .args
        .iter()
        .map(|t| match *t {
            Term::Var(v) => binding[v],
            Term::Const(c) => c,
        })
        .collect();
    (atom.predicate, args)
}

/// Grounds every schema over the problem's objects. A binding is kept only
/// if each precondition on a static predicate (one no schema adds or
/// deletes) holds in the initial state. Proposition ids follow the sorted
/// order of (predicate declaration, argument objects), so identical inputs
/// always produce identical ids and action order.
pub fn ground(domain: &Domain, problem: &Problem, opts: &GroundOptions) -> Result<GroundProblem, PddlError> {
    let objects_of_type: Vec<Vec<usize>> = (0..domain.types.len())
        .map(|t| {
            (0..problem.objects.len())
                .filter(|&o| domain.is_subtype(problem.objects[o].1, t))
                .collect()
        })
        .collect();

    let mut fluent = vec![false; domain.predicates.len()];
    for a in &domain.actions {
        for atom in a.add.iter().chain(&a.del) {
            fluent[atom.predicate] = true;
        }
    }
    let static_facts: HashSet<(usize, &[usize])> = problem
        .init
        .iter()
        .filter(|g| !fluent[g.predicate])
        .map(|g| (g.predicate, g.args.as_slice()))
        .collect();

    let mut raw = Vec::new();
    for (si, schema) in domain.actions.iter().enumerate() {
        // static preconditions, bucketed by the deepest parameter they use
        let mut checks: Vec<Vec<&Atom>> = vec![Vec::new(); schema.params.len() + 1];
        for atom in schema.pre.iter().filter(|a| !fluent[a.predicate]) {
            let depth = atom
                .args
                .iter()
                .filter_map(|t| match *t {
                    Term::Var(v) => Some(v + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[depth].push(atom);
        }
        let holds = |atom: &Atom, binding: &[usize]| {
            let (p, args) = instantiate(atom, binding);
            static_facts.contains(&(p, args.as_slice()))
        };
        if !checks[0].iter().all(|a| holds(a, &[])) {
            continue;
        }
        let domains: Vec<&[usize]> = schema
            .params
            .iter()
            .map(|(_, t)| objects_of_type[*t].as_slice())
            .collect();
        let mut binding = Vec::with_capacity(schema.params.len());
        let mut cursor = vec![0usize; schema.params.len()];
        let mut depth = 0;
        // iterative backtracking over parameter positions
        loop {
            if depth == schema.params.len() {
                if raw.len() >= opts.max_actions {
                    return Err(PddlError::new(ErrorKind::CapacityExceeded {
                        limit: opts.max_actions,
                    }));
                }
                raw.push(RawAction {
                    schema: si,
                    binding: binding.clone(),
                    pre: schema.pre.iter().map(|a| instantiate(a, &binding)).collect(),
                    add: schema.add.iter().map(|a| instantiate(a, &binding)).collect(),
                    del: schema.del.iter().map(|a| instantiate(a, &binding)).collect(),
                });
                if depth == 0 {
                    break;
                }
                depth -= 1;
                binding.pop();
                continue;
            }
            if cursor[depth] >= domains[depth].len() {
                cursor[depth] = 0;
                if depth == 0 {
                    break;
                }
                depth -= 1;
                binding.pop();
                continue;
            }
            let obj = domains[depth][cursor[depth]];
            cursor[depth] += 1;
            binding.push(obj);
            if checks[depth + 1].iter().all(|a| holds(a, &binding)) {
                depth += 1;
            } else {
                binding.pop();
            }
        }
    }
    if raw.is_empty() {
        return Err(PddlError::new(ErrorKind::NoActions));
    }

    let mut keys: Vec<Key> = problem
        .init
        .iter()
        .chain(&problem.goal)
        .map(|g: &GroundAtom| (g.predicate, g.args.clone()))
        .collect();
    for r in &raw {
        keys.extend(r.pre.iter().chain(&r.add).chain(&r.del).cloned());
    }
    keys.sort_unstable();
    keys.dedup();
    let id_of: HashMap<&Key, PropId> = keys.iter().enumerate().map(|(i, k)| (k, i as PropId)).collect();
    let n = keys.len();
    let name_of = |o: usize| problem.objects[o].0.as_str();
    let propositions = keys
        .iter()
        .map(|(p, args)| {
            let args: Vec<&str> = args.iter().map(|&o| name_of(o)).collect();
            Proposition::new(domain.predicates[*p].name.clone(), &args)
        })
        .collect();

    let mut warned = vec![false; domain.actions.len()];
    let actions = raw
        .iter()
        .map(|r| {
            let mut name = format!("({}", domain.actions[r.schema].name);
            for &o in &r.binding {
                name.push(' ');
                name.push_str(name_of(o));
            }
            name.push(')');
            let ids = |v: &[Key]| v.iter().map(|k| id_of[k]).collect::<Vec<_>>();
            let (action, conflict) = GroundAction::new(name, n, ids(&r.pre), ids(&r.add), ids(&r.del));
            if conflict && !std::mem::replace(&mut warned[r.schema], true) {
                log::warn!(
                    "action '{}' adds and deletes the same atom; add wins",
                    domain.actions[r.schema].name
                );
            }
            action
        })
        .collect();

    let init = PropSet::from_ids(n, problem.init.iter().map(|g| id_of[&(g.predicate, g.args.clone())]));
    let goal = PropSet::from_ids(n, problem.goal.iter().map(|g| id_of[&(g.predicate, g.args.clone())]));
    Ok(GroundProblem::new(
        domain.name.clone(),
        problem.name.clone(),
        propositions,
        actions,
        init,
        Goal::partial(goal),
        problem.objects.iter().map(|(o, _)| o.clone()).collect(),
    ))
}
