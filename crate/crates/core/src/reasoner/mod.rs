//! Bottom-up evaluation of positive Horn rules with comparison guards.
//!
//! [`materialize`] computes the least fixpoint of a rule set over a ground
//! fact set using semi-naive iteration. [`materialize_naive`] recomputes
//! every rule against the full store each round and serves as a reference.

mod builtins;
mod parse;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::asp::{AspError, Atom, FactSet, Term};

pub use builtins::{days_in_month, is_leap_year, lte_dates, parse_date, BuiltinRegistry, CalendarDate};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReasonerError {
    #[error(transparent)]
    Syntax(#[from] AspError),
    #[error("unsafe rule `{rule}`: {message}")]
    Safety { rule: String, message: String },
    #[error("unknown builtin @{name} (line {line})")]
    UnknownBuiltin { name: String, line: usize },
    #[error("@{builtin}({args}) failed in rule `{rule}`: {message}")]
    BuiltinDomain { builtin: String, args: String, rule: String, message: String },
}

/// Term pattern inside a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PTerm {
    Var(String),
    Wildcard,
    Const(Term),
    Tuple(Vec<PTerm>),
}

impl PTerm {
    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            PTerm::Var(v) => out.push(v.clone()),
            PTerm::Tuple(items) => items.iter().for_each(|t| t.collect_vars(out)),
            PTerm::Wildcard | PTerm::Const(_) => {}
        }
    }

    fn has_wildcard(&self) -> bool {
        match self {
            PTerm::Wildcard => true,
            PTerm::Tuple(items) => items.iter().any(PTerm::has_wildcard),
            _ => false,
        }
    }

    fn matches(&self, term: &Term, env: &mut Env) -> bool {
        match (self, term) {
            (PTerm::Wildcard, _) => true,
            (PTerm::Const(c), t) => c == t,
            (PTerm::Var(v), t) => match env.get(v) {
                Some(bound) => bound == t,
                None => {
                    env.insert(v.clone(), t.clone());
                    true
                }
            },
            (PTerm::Tuple(ps), Term::Tuple(ts)) => {
                ps.len() == ts.len() && ps.iter().zip(ts).all(|(p, t)| p.matches(t, env))
            }
            (PTerm::Tuple(_), _) => false,
        }
    }

    fn instantiate(&self, env: &Env) -> Term {
        match self {
            PTerm::Var(v) => env[v].clone(),
            PTerm::Const(c) => c.clone(),
            PTerm::Tuple(items) => Term::Tuple(items.iter().map(|t| t.instantiate(env)).collect()),
            PTerm::Wildcard => unreachable!("wildcards are rejected in heads and guards"),
        }
    }
}

impl fmt::Display for PTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PTerm::Var(v) => f.write_str(v),
            PTerm::Wildcard => f.write_str("_"),
            PTerm::Const(t) => write!(f, "{t}"),
            PTerm::Tuple(items) => write!(f, "({})", join(items)),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomPattern {
    pub predicate: String,
    pub terms: Vec<PTerm>,
}

impl fmt::Display for AtomPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str(&self.predicate)
        } else {
            write!(f, "{}({})", self.predicate, join(&self.terms))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Term(PTerm),
    Builtin(String, Vec<PTerm>),
}

impl Operand {
    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Operand::Term(t) => t.collect_vars(out),
            Operand::Builtin(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Term(t) => write!(f, "{t}"),
            Operand::Builtin(name, args) => write!(f, "@{name}({})", join(args)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub lhs: Operand,
    pub op: CmpOp,
    pub rhs: Operand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BodyElement {
    Atom(AtomPattern),
    Guard(Guard),
}

impl fmt::Display for BodyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElement::Atom(a) => write!(f, "{a}"),
            BodyElement::Guard(g) => {
                let op = match g.op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                };
                write!(f, "{} {op} {}", g.lhs, g.rhs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: AtomPattern,
    pub body: Vec<BodyElement>,
}

impl Rule {
    fn positives(&self) -> Vec<&AtomPattern> {
        self.body
            .iter()
            .filter_map(|el| match el {
                BodyElement::Atom(a) => Some(a),
                BodyElement::Guard(_) => None,
            })
            .collect()
    }

    fn guards(&self) -> impl Iterator<Item = &Guard> {
        self.body.iter().filter_map(|el| match el {
            BodyElement::Guard(g) => Some(g),
            BodyElement::Atom(_) => None,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- {}", join(&self.body))?;
        }
        f.write_str(".")
    }
}

/// Parses a rules file, checking builtins against the default registry.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ReasonerError> {
    parse::parse_rules(text, &BuiltinRegistry::default())
}

pub fn parse_rules_with(text: &str, builtins: &BuiltinRegistry) -> Result<Vec<Rule>, ReasonerError> {
    parse::parse_rules(text, builtins)
}

type Env = HashMap<String, Term>;

#[derive(Default)]
struct Store {
    by_pred: HashMap<String, Vec<Atom>>,
    all: HashSet<Atom>,
}

impl Store {
    fn insert(&mut self, atom: Atom) -> bool {
        if self.all.contains(&atom) {
            return false;
        }
        self.by_pred.entry(atom.predicate.clone()).or_default().push(atom.clone());
        self.all.insert(atom);
        true
    }

    fn get(&self, predicate: &str) -> &[Atom] {
        self.by_pred.get(predicate).map(Vec::as_slice).unwrap_or(&[])
    }

    fn is_empty(&self) -> bool {
        self.all.is_empty()
    }
}

impl<'a> FromIterator<&'a Atom> for Store {
    fn from_iter<I: IntoIterator<Item = &'a Atom>>(iter: I) -> Self {
        let mut s = Store::default();
        for a in iter {
            s.insert(a.clone());
        }
        s
    }
}

struct RuleEval<'a> {
    rule: &'a Rule,
    positives: Vec<&'a AtomPattern>,
    builtins: &'a BuiltinRegistry,
}

impl RuleEval<'_> {
    /// Fires the rule with body atom `delta_pos` drawn from `delta` and every
    /// other body atom drawn from `total`.
    fn fire(&self, total: &Store, delta: Option<(usize, &Store)>, out: &mut Vec<Atom>) -> Result<(), ReasonerError> {
        let mut env = Env::new();
        self.join(0, total, delta, &mut env, out)
    }

    fn join(
        &self,
        k: usize,
        total: &Store,
        delta: Option<(usize, &Store)>,
        env: &mut Env,
        out: &mut Vec<Atom>,
    ) -> Result<(), ReasonerError> {
        if k == self.positives.len() {
            if self.guards_hold(env)? {
                let head = &self.rule.head;
                out.push(Atom::new(head.predicate.clone(), head.terms.iter().map(|t| t.instantiate(env)).collect()));
            }
            return Ok(());
        }
        let pattern = self.positives[k];
        let source = match delta {
            Some((pos, d)) if pos == k => d,
            _ => total,
        };
        for atom in source.get(&pattern.predicate) {
            if atom.terms.len() != pattern.terms.len() {
                continue;
            }
            let mut local = env.clone();
            if pattern.terms.iter().zip(&atom.terms).all(|(p, t)| p.matches(t, &mut local)) {
                self.join(k + 1, total, delta, &mut local, out)?;
            }
        }
        Ok(())
    }

    fn guards_hold(&self, env: &Env) -> Result<bool, ReasonerError> {
        for g in self.rule.guards() {
            let l = self.eval_operand(&g.lhs, env)?;
            let r = self.eval_operand(&g.rhs, env)?;
            let holds = match g.op {
                CmpOp::Eq => l == r,
                CmpOp::Ne => l != r,
            };
            if !holds {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn eval_operand(&self, op: &Operand, env: &Env) -> Result<Term, ReasonerError> {
        match op {
            Operand::Term(t) => Ok(t.instantiate(env)),
            Operand::Builtin(name, args) => {
                let args: Vec<Term> = args.iter().map(|a| a.instantiate(env)).collect();
                let fail = |message: String| ReasonerError::BuiltinDomain {
                    builtin: name.clone(),
                    args: join(&args),
                    rule: self.rule.to_string(),
                    message,
                };
                match self.builtins.call(name, &args) {
                    Some(Ok(t)) => Ok(t),
                    Some(Err(msg)) => Err(fail(msg)),
                    None => Err(fail("builtin not registered".into())),
                }
            }
        }
    }
}

fn compile<'a>(rules: &'a [Rule], builtins: &'a BuiltinRegistry) -> Vec<RuleEval<'a>> {
    rules.iter().map(|rule| RuleEval { rule, positives: rule.positives(), builtins }).collect()
}

/// Least fixpoint of `rules` over `facts` (input atoms included), by
/// semi-naive evaluation.
pub fn materialize(facts: &FactSet, rules: &[Rule], builtins: &BuiltinRegistry) -> Result<FactSet, ReasonerError> {
    let evals = compile(rules, builtins);
    let mut total: Store = facts.iter().collect();
    let mut delta: Store = facts.iter().collect();
    let mut first = true;
    loop {
        let mut derived = Vec::new();
        for ev in &evals {
            if ev.positives.is_empty() {
                if first {
                    ev.fire(&total, None, &mut derived)?;
                }
                continue;
            }
            for pos in 0..ev.positives.len() {
                if delta.get(&ev.positives[pos].predicate).is_empty() {
                    continue;
                }
                ev.fire(&total, Some((pos, &delta)), &mut derived)?;
            }
        }
        first = false;
        let mut next = Store::default();
        for atom in derived {
            if !total.all.contains(&atom) {
                next.insert(atom);
            }
        }
        if next.is_empty() {
            break;
        }
        for atom in &next.all {
            total.insert(atom.clone());
        }
        delta = next;
    }
    Ok(total.all.into_iter().collect())
}

/// Reference evaluator: fires every rule against the whole store until no
/// new atom appears.
pub fn materialize_naive(
    facts: &FactSet,
    rules: &[Rule],
    builtins: &BuiltinRegistry,
) -> Result<FactSet, ReasonerError> {
    let evals = compile(rules, builtins);
    let mut total: Store = facts.iter().collect();
    loop {
        let mut derived = Vec::new();
        for ev in &evals {
            ev.fire(&total, None, &mut derived)?;
        }
        let mut changed = false;
        for atom in derived {
            changed |= total.insert(atom);
        }
        if !changed {
            break;
        }
    }
    Ok(total.all.into_iter().collect())
}

/// String payloads of all `error/1` atoms in canonical order.
pub fn extract_errors(materialized: &FactSet) -> Vec<String> {
    materialized
        .with_predicate("error")
        .filter(|a| a.arity() == 1)
        .map(|a| match &a.terms[0] {
            Term::Str(s) | Term::Symbol(s) => s.clone(),
            t => t.to_string(),
        })
        .collect()
}
