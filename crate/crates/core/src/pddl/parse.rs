//! Domain and problem descriptions built from s-expressions.

use std::collections::HashMap;

use super::sexpr::{parse_document, Pos, SExpr};
use super::{ErrorKind, PddlError};

pub const OBJECT_TYPE: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Index into the schema's parameter list.
    Var(usize),
    /// Index into the object table (domain constants come first).
    Const(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub predicate: usize,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    /// `(variable name, type)`
    pub params: Vec<(String, usize)>,
    pub pre: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Type names; index 0 is `object`.
    pub types: Vec<String>,
    pub type_parent: Vec<Option<usize>>,
    /// `(name, type)`
    pub constants: Vec<(String, usize)>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
    type_index: HashMap<String, usize>,
    predicate_index: HashMap<String, usize>,
    constant_index: HashMap<String, usize>,
}

impl Domain {
    pub fn type_id(&self, name: &str) -> Option<usize> {
        self.type_index.get(name).copied()
    }

    pub fn predicate_id(&self, name: &str) -> Option<usize> {
        self.predicate_index.get(name).copied()
    }

    /// True when `t` equals `ancestor` or descends from it.
    pub fn is_subtype(&self, mut t: usize, ancestor: usize) -> bool {
        // bounded walk: the hierarchy may be malformed (cyclic) in input
        for _ in 0..=self.types.len() {
            if t == ancestor {
                return true;
            }
            match self.type_parent[t] {
                Some(p) => t = p,
                None => return false,
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAtom {
    pub predicate: usize,
    pub args: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    /// Full object table: domain constants followed by problem objects.
    pub objects: Vec<(String, usize)>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::at(pos, ErrorKind::Syntax(msg.into()))
}

fn unsupported(pos: Pos, feature: impl Into<String>) -> PddlError {
    PddlError::at(pos, ErrorKind::Unsupported(feature.into()))
}

fn atom_of(e: &SExpr, what: &str) -> Result<String, PddlError> {
    e.as_atom()
        .map(str::to_string)
        .ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// Checks `(define (<kind> <name>) ...)` and returns the name and the
/// remaining sections.
fn define_header<'e>(doc: &'e SExpr, kind: &str) -> Result<(String, &'e [SExpr]), PddlError> {
    let items = doc.as_list().unwrap_or(&[]);
    if doc.head() != Some("define") {
        return Err(syntax(doc.pos(), "expected (define ...)"));
    }
    let header = items
        .get(1)
        .ok_or_else(|| syntax(doc.pos(), format!("missing ({kind} <name>)")))?;
    match header.as_list() {
        Some([k, name]) if k.as_atom() == Some(kind) => Ok((atom_of(name, "a name")?, &items[2..])),
        _ => Err(syntax(header.pos(), format!("expected ({kind} <name>)"))),
    }
}

/// `a b - t c` -> [(a, Some(t)), (b, Some(t)), (c, None)]
fn typed_list(items: &[SExpr]) -> Result<Vec<(String, Pos, Option<(String, Pos)>)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let e = &items[i];
        if e.as_atom() == Some("-") {
            let t = items
                .get(i + 1)
                .ok_or_else(|| syntax(e.pos(), "missing type after '-'"))?;
            if t.head() == Some("either") {
                return Err(unsupported(t.pos(), "either types"));
            }
            let tname = atom_of(t, "a type name")?;
            if pending.is_empty() {
                return Err(syntax(e.pos(), "type annotation without names"));
            }
            for (n, p) in pending.drain(..) {
                out.push((n, p, Some((tname.clone(), t.pos()))));
            }
            i += 2;
        } else {
            pending.push((atom_of(e, "a name")?, e.pos()));
            i += 1;
        }
    }
    out.extend(pending.into_iter().map(|(n, p)| (n, p, None)));
    Ok(out)
}

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let doc = parse_document(text)?;
    let (name, sections) = define_header(&doc, "domain")?;
    let mut d = Domain {
        name,
        requirements: Vec::new(),
        types: vec!["object".to_string()],
        type_parent: vec![None],
        constants: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
        type_index: HashMap::from([("object".to_string(), OBJECT_TYPE)]),
        predicate_index: HashMap::new(),
        constant_index: HashMap::new(),
    };
    let mut action_exprs = Vec::new();
    for section in sections {
        let items = section
            .as_list()
            .ok_or_else(|| syntax(section.pos(), "expected a section"))?;
        let key = section.head().unwrap_or("");
        match key {
            ":requirements" => {
                for r in &items[1..] {
                    let r_name = atom_of(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r_name.as_str()) {
                        return Err(unsupported(r.pos(), r_name));
                    }
                    d.requirements.push(r_name);
                }
            }
            ":types" => parse_types(&mut d, &items[1..])?,
            ":constants" => {
                for (n, p, t) in typed_list(&items[1..])? {
                    let ty = resolve_type(&d, t)?;
                    if d.constant_index.contains_key(&n) {
                        return Err(PddlError::at(p, ErrorKind::Duplicate(n)));
                    }
                    d.constant_index.insert(n.clone(), d.constants.len());
                    d.constants.push((n, ty));
                }
            }
            ":predicates" => {
                for decl in &items[1..] {
                    let parts = decl
                        .as_list()
                        .filter(|l| !l.is_empty())
                        .ok_or_else(|| syntax(decl.pos(), "expected (<predicate> ?params)"))?;
                    let pname = atom_of(&parts[0], "a predicate name")?;
                    let params = typed_list(&parts[1..])?
                        .into_iter()
                        .map(|(_, _, t)| resolve_type(&d, t))
                        .collect::<Result<Vec<_>, _>>()?;
                    if d.predicate_index.contains_key(&pname) {
                        return Err(PddlError::at(decl.pos(), ErrorKind::Duplicate(pname)));
                    }
                    d.predicate_index.insert(pname.clone(), d.predicates.len());
                    d.predicates.push(PredicateDecl {
                        name: pname,
                        params,
                    });
                }
            }
            ":action" => action_exprs.push(section),
            ":functions" => return Err(unsupported(section.pos(), ":functions")),
            ":derived" => return Err(unsupported(section.pos(), "derived predicates")),
            ":durative-action" => return Err(unsupported(section.pos(), "durative actions")),
            ":constraints" => return Err(unsupported(section.pos(), ":constraints")),
            other => return Err(syntax(section.pos(), format!("unknown domain section '{other}'"))),
        }
    }
    // actions last: they may mention predicates/constants declared later
    for a in action_exprs {
        let schema = parse_action(&d, a)?;
        if d.actions.iter().any(|x| x.name == schema.name) {
            return Err(PddlError::at(a.pos(), ErrorKind::Duplicate(schema.name)));
        }
        d.actions.push(schema);
    }
    Ok(d)
}

fn parse_types(d: &mut Domain, items: &[SExpr]) -> Result<(), PddlError> {
    let list = typed_list(items)?;
    let intern = |d: &mut Domain, name: &str| -> usize {
        if let Some(&id) = d.type_index.get(name) {
            return id;
        }
        let id = d.types.len();
        d.types.push(name.to_string());
        d.type_parent.push(Some(OBJECT_TYPE));
        d.type_index.insert(name.to_string(), id);
        id
    };
    for (n, p, parent) in list {
        let id = intern(d, &n);
        if id == OBJECT_TYPE {
            if parent.is_some() {
                return Err(syntax(p, "type 'object' cannot have a parent"));
            }
            continue;
        }
        let parent_id = match parent {
            Some((pn, _)) => intern(d, &pn),
            None => OBJECT_TYPE,
        };
        d.type_parent[id] = Some(parent_id);
    }
    Ok(())
}

fn resolve_type(d: &Domain, t: Option<(String, Pos)>) -> Result<usize, PddlError> {
    match t {
        None => Ok(OBJECT_TYPE),
        Some((name, pos)) => d
            .type_id(&name)
            .ok_or_else(|| PddlError::at(pos, ErrorKind::UnknownType(name))),
    }
}

fn parse_action(d: &Domain, expr: &SExpr) -> Result<ActionSchema, PddlError> {
    let items = expr.as_list().unwrap_or(&[]);
    let name = atom_of(
        items.get(1).ok_or_else(|| syntax(expr.pos(), "missing action name"))?,
        "an action name",
    )?;
    let mut params = Vec::new();
    let mut pre = None;
    let mut effect = None;
    let mut i = 2;
    while i < items.len() {
        let key = atom_of(&items[i], "an action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
        match key.as_str() {
            ":parameters" => {
                let list = value
                    .as_list()
                    .ok_or_else(|| syntax(value.pos(), "expected a parameter list"))?;
                for (n, p, t) in typed_list(list)? {
                    if !n.starts_with('?') {
                        return Err(syntax(p, format!("parameter '{n}' must start with '?'")));
                    }
                    if params.iter().any(|(m, _)| *m == n) {
                        return Err(PddlError::at(p, ErrorKind::Duplicate(n)));
                    }
                    params.push((n, resolve_type(d, t)?));
                }
            }
            ":precondition" => pre = Some(value),
            ":effect" => effect = Some(value),
            other => return Err(syntax(items[i].pos(), format!("unknown action keyword '{other}'"))),
        }
        i += 2;
    }
    let scope = Scope { domain: d, params: &params };
    let mut schema = ActionSchema {
        name,
        params: params.clone(),
        pre: Vec::new(),
        add: Vec::new(),
        del: Vec::new(),
        pos: expr.pos(),
    };
    if let Some(p) = pre {
        scope.condition(p, &mut schema.pre, "negative preconditions")?;
    }
    if let Some(e) = effect {
        scope.effect(e, &mut schema.add, &mut schema.del)?;
    }
    Ok(schema)
}

struct Scope<'a> {
    domain: &'a Domain,
    params: &'a [(String, usize)],
}

impl Scope<'_> {
    /// Positive conjunction of atoms; `negation` names the feature to
    /// report if a `not` shows up.
    fn condition(&self, e: &SExpr, out: &mut Vec<Atom>, negation: &str) -> Result<(), PddlError> {
        match e.as_list() {
            None => Err(syntax(e.pos(), "expected a condition")),
            Some([]) => Ok(()),
            Some(items) => match e.head() {
                Some("and") => {
                    for c in &items[1..] {
                        self.condition(c, out, negation)?;
                    }
                    Ok(())
                }
                Some("not") => Err(unsupported(e.pos(), negation)),
                Some(h @ ("or" | "imply" | "forall" | "exists" | "preference")) => {
                    Err(unsupported(e.pos(), format!("'{h}' conditions")))
                }
                Some("=") => Err(unsupported(e.pos(), "equality")),
                _ => {
                    out.push(self.atom(e)?);
                    Ok(())
                }
            },
        }
    }

    fn effect(&self, e: &SExpr, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
        match e.as_list() {
            None => Err(syntax(e.pos(), "expected an effect")),
            Some([]) => Ok(()),
            Some(items) => match e.head() {
                Some("and") => {
                    for c in &items[1..] {
                        self.effect(c, add, del)?;
                    }
                    Ok(())
                }
                Some("not") => match items {
                    [_, inner] => {
                        del.push(self.atom(inner)?);
                        Ok(())
                    }
                    _ => Err(syntax(e.pos(), "(not ...) takes exactly one atom")),
                },
                Some("when") => Err(unsupported(e.pos(), "conditional effects")),
                Some("forall") => Err(unsupported(e.pos(), "universal effects")),
                Some("increase" | "decrease" | "assign" | "scale-up" | "scale-down") => {
                    Err(unsupported(e.pos(), "numeric effects"))
                }
                _ => {
                    add.push(self.atom(e)?);
                    Ok(())
                }
            },
        }
    }

    fn atom(&self, e: &SExpr) -> Result<Atom, PddlError> {
        let items = e
            .as_list()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| syntax(e.pos(), "expected an atom"))?;
        let name = atom_of(&items[0], "a predicate name")?;
        let predicate = self
            .domain
            .predicate_id(&name)
            .ok_or_else(|| PddlError::at(items[0].pos(), ErrorKind::UnknownPredicate(name.clone())))?;
        let expected = self.domain.predicates[predicate].params.len();
        if items.len() - 1 != expected {
            return Err(PddlError::at(
                e.pos(),
                ErrorKind::Arity {
                    predicate: name,
                    expected,
                    found: items.len() - 1,
                },
            ));
        }
        let args = items[1..]
            .iter()
            .map(|a| {
                let s = atom_of(a, "a term")?;
                if s.starts_with('?') {
                    self.params
                        .iter()
                        .position(|(p, _)| *p == s)
                        .map(Term::Var)
                        .ok_or_else(|| PddlError::at(a.pos(), ErrorKind::UnknownVariable(s)))
                } else {
                    self.domain
                        .constant_index
                        .get(&s)
                        .map(|&c| Term::Const(c))
                        .ok_or_else(|| PddlError::at(a.pos(), ErrorKind::UnknownObject(s)))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Atom { predicate, args })
    }
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let doc = parse_document(text)?;
    let (name, sections) = define_header(&doc, "problem")?;
    let mut p = Problem {
        name,
        domain_name: String::new(),
        objects: domain.constants.clone(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    let mut index: HashMap<String, usize> = domain.constant_index.clone();
    let mut init_expr = None;
    let mut goal_expr = None;
    for section in sections {
        let items = section
            .as_list()
            .ok_or_else(|| syntax(section.pos(), "expected a section"))?;
        match section.head().unwrap_or("") {
            ":domain" => {
                let dn = atom_of(
                    items.get(1).ok_or_else(|| syntax(section.pos(), "missing domain name"))?,
                    "a domain name",
                )?;
                if dn != domain.name {
                    return Err(PddlError::at(
                        section.pos(),
                        ErrorKind::DomainMismatch {
                            expected: domain.name.clone(),
                            found: dn,
                        },
                    ));
                }
                p.domain_name = dn;
            }
            ":requirements" => {
                for r in &items[1..] {
                    let r_name = atom_of(r, "a requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&r_name.as_str()) {
                        return Err(unsupported(r.pos(), r_name));
                    }
                }
            }
            ":objects" => {
                for (n, pos, t) in typed_list(&items[1..])? {
                    let ty = resolve_type(domain, t)?;
                    match index.get(&n) {
                        // a constant repeated as an object with its own type is harmless
                        Some(&i) if p.objects[i].1 == ty && i < domain.constants.len() => {}
                        Some(_) => return Err(PddlError::at(pos, ErrorKind::Duplicate(n))),
                        None => {
                            index.insert(n.clone(), p.objects.len());
                            p.objects.push((n, ty));
                        }
                    }
                }
            }
            ":init" => init_expr = Some(section),
            ":goal" => goal_expr = Some(section),
            ":metric" => log::warn!("{}: ignoring :metric", section.pos()),
            other => {
                return Err(syntax(section.pos(), format!("unknown problem section '{other}'")))
            }
        }
    }
    let ground_atom = |e: &SExpr| -> Result<GroundAtom, PddlError> {
        let items = e
            .as_list()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| syntax(e.pos(), "expected a ground atom"))?;
        let name = atom_of(&items[0], "a predicate name")?;
        match name.as_str() {
            "not" => return Err(unsupported(e.pos(), "negated goals")),
            "=" => return Err(unsupported(e.pos(), "numeric fluents")),
            "or" | "imply" | "forall" | "exists" | "preference" => {
                return Err(unsupported(e.pos(), format!("'{name}' conditions")))
            }
            _ => {}
        }
        let predicate = domain
            .predicate_id(&name)
            .ok_or_else(|| PddlError::at(items[0].pos(), ErrorKind::UnknownPredicate(name.clone())))?;
        let expected = domain.predicates[predicate].params.len();
        if items.len() - 1 != expected {
            return Err(PddlError::at(
                e.pos(),
                ErrorKind::Arity {
                    predicate: name,
                    expected,
                    found: items.len() - 1,
                },
            ));
        }
        let args = items[1..]
            .iter()
            .map(|a| {
                let s = atom_of(a, "an object")?;
                index
                    .get(&s)
                    .copied()
                    .ok_or_else(|| PddlError::at(a.pos(), ErrorKind::UnknownObject(s)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroundAtom { predicate, args })
    };
    if let Some(init) = init_expr {
        for e in &init.as_list().unwrap_or(&[])[1..] {
            if e.head() == Some("not") {
                return Err(unsupported(e.pos(), "negative initial literals"));
            }
            p.init.push(ground_atom(e)?);
        }
    }
    let goal = goal_expr.ok_or_else(|| syntax(doc.pos(), "missing :goal"))?;
    let goal_items = goal.as_list().unwrap_or(&[]);
    if goal_items.len() != 2 {
        return Err(syntax(goal.pos(), "(:goal ...) takes exactly one condition"));
    }
    let mut stack = vec![&goal_items[1]];
    while let Some(e) = stack.pop() {
        match e.as_list() {
            Some([]) => {}
            Some(items) if e.head() == Some("and") => stack.extend(items[1..].iter().rev()),
            _ => p.goal.push(ground_atom(e)?),
        }
    }
    Ok(p)
}
