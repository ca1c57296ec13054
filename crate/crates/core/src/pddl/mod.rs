//! Typed-STRIPS subset of PDDL: domain and task data model, parsers,
//! renderer, and task generation from a materialized representation.

mod domain;
mod generate;
pub mod sexpr;
mod task;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use domain::parse_domain;
pub use generate::{generate_task, TaskError, DEFAULT_DOMAIN_NAME};
pub use task::{parse_task, parse_task_checked, render_task};

/// The domain shipped with the crate.
pub const BUNDLED_DOMAIN: &str = include_str!("../../data/domain.pddl");

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{context}: predicate `{predicate}` expects {expected} arguments, found {found}")]
    ArityMismatch { predicate: String, expected: usize, found: usize, context: String },
    #[error("undeclared type `{0}`")]
    UndeclaredType(String),
    #[error("{context}: undeclared predicate `{predicate}`")]
    UndeclaredPredicate { predicate: String, context: String },
    #[error("{context}: undeclared constant or object `{name}`")]
    UndeclaredConstant { name: String, context: String },
    #[error("{context}: variable `?{name}` is not a parameter")]
    UndeclaredVariable { name: String, context: String },
    #[error("{context}: `{name}` has type `{found}`, expected `{expected}`")]
    TypeMismatch { name: String, expected: String, found: String, context: String },
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("task is for domain `{task}`, not `{domain}`")]
    DomainMismatch { task: String, domain: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName { name: name.into(), ty: ty.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// Argument of a schema literal: a parameter (`?x`, stored without `?`) or
/// a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    Var(String),
    Const(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Var(v) => write!(f, "?{v}"),
            Arg::Const(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub positive: bool,
    pub predicate: String,
    pub args: Vec<Arg>,
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut atom = format!("({}", self.predicate);
        for a in &self.args {
            atom.push(' ');
            atom.push_str(&a.to_string());
        }
        atom.push(')');
        if self.positive {
            f.write_str(&atom)
        } else {
            write!(f, "(not {atom})")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<Literal>,
    /// Positive literals are add effects, negative ones delete effects.
    pub effect: Vec<Literal>,
}

impl ActionSchema {
    /// Index of the produced-value parameter `?out`, if the action has one.
    pub fn output_index(&self) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == "out")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types with their parent (`object` for roots).
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl Domain {
    pub fn bundled() -> Domain {
        parse_domain(BUNDLED_DOMAIN).expect("bundled domain is valid")
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == "object" || self.types.iter().any(|t| t.name == ty)
    }

    /// `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = sub;
        for _ in 0..=self.types.len() {
            if cur == sup {
                return true;
            }
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => cur = &t.ty,
                None => return sup == "object",
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        GroundAtom { predicate: predicate.into(), args: args.into_iter().map(Into::into).collect() }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskProblem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<GroundAtom>,
    pub goal: Vec<GroundAtom>,
}

impl TaskProblem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }
}

/// Concrete values of task objects, kept outside the planning state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BindingEnv(BTreeMap<String, String>);

impl BindingEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, object: impl Into<String>, value: impl Into<String>) -> Option<String> {
        self.0.insert(object.into(), value.into())
    }

    pub fn get(&self, object: &str) -> Option<&str> {
        self.0.get(object).map(String::as_str)
    }

    pub fn contains(&self, object: &str) -> bool {
        self.0.contains_key(object)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for BindingEnv {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        BindingEnv(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}
