//! Ground ASP facts: the carrier for both the intermediate representation
//! produced by translation and the materialized representation produced by
//! the reasoner.
//!
//! Grammar accepted by [`parse_facts`]:
//!
//! ```text
//! facts := (atom ".")*
//! atom  := pred "(" term ("," term)* ")" | pred
//! term  := symbol | string | "(" term ("," term)* ")"
//! ```
//!
//! `%` starts a comment that runs to the end of the line. Strings have no
//! escape sequences; the first `"` after the opening quote closes them.

pub(crate) mod lexer;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use lexer::{Cursor, Tok};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AspError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("invalid term: {0}")]
    InvalidTerm(String),
}

/// A ground term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Symbol(String),
    Str(String),
    Tuple(Vec<Term>),
}

impl Term {
    pub fn symbol(name: impl Into<String>) -> Result<Self, AspError> {
        let name = name.into();
        if is_symbol(&name) {
            Ok(Term::Symbol(name))
        } else {
            Err(AspError::InvalidTerm(format!("`{name}` is not a symbol constant")))
        }
    }

    pub fn string(value: impl Into<String>) -> Result<Self, AspError> {
        let value = value.into();
        if value.contains('"') {
            Err(AspError::InvalidTerm(format!("string `{value}` contains a quote")))
        } else {
            Ok(Term::Str(value))
        }
    }

    pub fn tuple(items: Vec<Term>) -> Result<Self, AspError> {
        if items.is_empty() {
            Err(AspError::InvalidTerm("empty tuple".into()))
        } else {
            Ok(Term::Tuple(items))
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Term::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Symbol or string payload without quoting.
    pub fn text(&self) -> Option<&str> {
        match self {
            Term::Symbol(s) | Term::Str(s) => Some(s),
            Term::Tuple(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) => f.write_str(s),
            Term::Str(s) => write!(f, "\"{s}\""),
            Term::Tuple(items) => {
                f.write_str("(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// Ordering is by rendered text, which is injective since strings cannot
// contain quotes.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Symbol(a), Term::Symbol(b)) => a.cmp(b),
            _ => self.to_string().cmp(&other.to_string()),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// A ground atom `pred(t1, ..., tn)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), terms }
    }

    pub fn arity(&self) -> usize {
        self.terms.len()
    }

    /// True for intermediate-representation atoms (leading underscore).
    pub fn is_intermediate(&self) -> bool {
        self.predicate.starts_with('_')
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.terms.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.terms.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.predicate
            .cmp(&other.predicate)
            .then(self.arity().cmp(&other.arity()))
            .then_with(|| self.terms.cmp(&other.terms))
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deduplicated set of ground atoms, iterated in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactSet {
    atoms: BTreeSet<Atom>,
}

impl FactSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the atom was already present.
    pub fn insert(&mut self, atom: Atom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn with_predicate<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.atoms.iter().filter(move |a| a.predicate == predicate)
    }

    pub fn extend(&mut self, other: impl IntoIterator<Item = Atom>) {
        self.atoms.extend(other);
    }

    pub fn is_superset(&self, other: &FactSet) -> bool {
        self.atoms.is_superset(&other.atoms)
    }

    /// Atoms whose predicate has no leading underscore.
    pub fn derived_only(&self) -> FactSet {
        self.atoms.iter().filter(|a| !a.is_intermediate()).cloned().collect()
    }
}

impl FromIterator<Atom> for FactSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        FactSet { atoms: iter.into_iter().collect() }
    }
}

impl IntoIterator for FactSet {
    type Item = Atom;
    type IntoIter = std::collections::btree_set::IntoIter<Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.into_iter()
    }
}

impl<'a> IntoIterator for &'a FactSet {
    type Item = &'a Atom;
    type IntoIter = std::collections::btree_set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.atoms.iter()
    }
}

impl fmt::Display for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_facts(self))
    }
}

impl std::str::FromStr for FactSet {
    type Err = AspError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_facts(s)
    }
}

pub fn parse_facts(text: &str) -> Result<FactSet, AspError> {
    let mut cur = Cursor::new(text)?;
    let mut facts = FactSet::new();
    while !cur.at_end() {
        let atom = parse_atom(&mut cur)?;
        cur.expect(&Tok::Dot, "`.` after atom")?;
        facts.insert(atom);
    }
    Ok(facts)
}

/// One atom per line, each terminated by `.`, in canonical order.
pub fn render_facts(facts: &FactSet) -> String {
    let mut out = String::new();
    for atom in facts {
        out.push_str(&atom.to_string());
        out.push_str(".\n");
    }
    out
}

fn parse_atom(cur: &mut Cursor) -> Result<Atom, AspError> {
    let predicate = match cur.peek() {
        Some(Tok::Ident(name)) => name.clone(),
        Some(Tok::Var(name)) => return Err(cur.error(format!("predicate `{name}` must start with a lowercase letter"))),
        Some(t) => return Err(cur.error(format!("expected predicate, found {}", t.describe()))),
        None => return Err(cur.error("expected predicate, found end of input")),
    };
    cur.next();
    let mut terms = Vec::new();
    if cur.peek() == Some(&Tok::LParen) {
        cur.next();
        terms = parse_term_list(cur)?;
    }
    Ok(Atom { predicate, terms })
}

/// Parses `t1, ..., tn )` after an opening parenthesis.
fn parse_term_list(cur: &mut Cursor) -> Result<Vec<Term>, AspError> {
    let mut terms = vec![parse_term(cur)?];
    loop {
        match cur.peek() {
            Some(Tok::Comma) => {
                cur.next();
                terms.push(parse_term(cur)?);
            }
            Some(Tok::RParen) => {
                cur.next();
                return Ok(terms);
            }
            Some(t) => return Err(cur.error(format!("expected `,` or `)`, found {}", t.describe()))),
            None => return Err(cur.error("unbalanced parenthesis: expected `)`")),
        }
    }
}

fn parse_term(cur: &mut Cursor) -> Result<Term, AspError> {
    match cur.peek().cloned() {
        Some(Tok::Ident(name)) if !name.starts_with('_') => {
            cur.next();
            Ok(Term::Symbol(name))
        }
        Some(Tok::Str(s)) => {
            cur.next();
            Ok(Term::Str(s))
        }
        Some(Tok::LParen) => {
            cur.next();
            Ok(Term::Tuple(parse_term_list(cur)?))
        }
        Some(Tok::Var(name)) => {
            Err(cur.error(format!("`{name}`: identifiers in facts must start with a lowercase letter")))
        }
        Some(t) => Err(cur.error(format!("expected term, found {}", t.describe()))),
        None => Err(cur.error("expected term, found end of input")),
    }
}
