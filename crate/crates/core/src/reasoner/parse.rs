//! Restricted rule grammar:
//!
//! ```text
//! rule    := atom [":-" element ("," element)*] "."
//! element := atom | operand ("==" | "!=") operand
//! operand := Var | symbol | string | tuple | "@" name "(" args ")"
//! ```

use std::collections::HashSet;

use super::{AtomPattern, BodyElement, BuiltinRegistry, CmpOp, Guard, Operand, PTerm, ReasonerError, Rule};
use crate::asp::lexer::{Cursor, Tok};
use crate::asp::Term;

pub(super) fn parse_rules(text: &str, builtins: &BuiltinRegistry) -> Result<Vec<Rule>, ReasonerError> {
    let mut cur = Cursor::new(text)?;
    let mut rules = Vec::new();
    while !cur.at_end() {
        let (line, _) = cur.location();
        let rule = parse_rule(&mut cur)?;
        check_rule(&rule, builtins, line)?;
        rules.push(rule);
    }
    Ok(rules)
}

fn parse_rule(cur: &mut Cursor) -> Result<Rule, ReasonerError> {
    let head = match parse_element(cur)? {
        BodyElement::Atom(a) => a,
        BodyElement::Guard(_) => return Err(cur.error("rule head must be an atom").into()),
    };
    let mut body = Vec::new();
    if cur.peek() == Some(&Tok::If) {
        cur.next();
        body.push(parse_element(cur)?);
        while cur.peek() == Some(&Tok::Comma) {
            cur.next();
            body.push(parse_element(cur)?);
        }
    }
    cur.expect(&Tok::Dot, "`.` at end of rule")?;
    Ok(Rule { head, body })
}

enum Parsed {
    Term(PTerm),
    Call(String, Vec<PTerm>),
    Atom(AtomPattern),
}

fn parse_element(cur: &mut Cursor) -> Result<BodyElement, ReasonerError> {
    let lhs = parse_operand(cur)?;
    let op = match cur.peek() {
        Some(Tok::EqEq) => Some(CmpOp::Eq),
        Some(Tok::NotEq) => Some(CmpOp::Ne),
        _ => None,
    };
    match op {
        None => match lhs {
            Parsed::Atom(a) => Ok(BodyElement::Atom(a)),
            Parsed::Term(PTerm::Const(Term::Symbol(name))) => {
                Ok(BodyElement::Atom(AtomPattern { predicate: name, terms: vec![] }))
            }
            _ => Err(cur.error("expected an atom or a comparison").into()),
        },
        Some(op) => {
            cur.next();
            let rhs = parse_operand(cur)?;
            Ok(BodyElement::Guard(Guard { lhs: to_operand(cur, lhs)?, op, rhs: to_operand(cur, rhs)? }))
        }
    }
}

fn to_operand(cur: &Cursor, p: Parsed) -> Result<Operand, ReasonerError> {
    match p {
        Parsed::Term(PTerm::Wildcard) => Err(cur.error("`_` cannot appear in a comparison").into()),
        Parsed::Term(t) => Ok(Operand::Term(t)),
        Parsed::Call(name, args) => Ok(Operand::Builtin(name, args)),
        Parsed::Atom(a) => Err(cur.error(format!("`{}(...)` is not a comparable term", a.predicate)).into()),
    }
}

fn parse_operand(cur: &mut Cursor) -> Result<Parsed, ReasonerError> {
    match cur.peek().cloned() {
        Some(Tok::At) => {
            cur.next();
            let name = match cur.next().map(|s| s.tok) {
                Some(Tok::Ident(n)) => n,
                _ => return Err(cur.error("expected builtin name after `@`").into()),
            };
            cur.expect(&Tok::LParen, "`(` after builtin name")?;
            Ok(Parsed::Call(name, parse_pterm_list(cur)?))
        }
        Some(Tok::Ident(name)) if cur.peek_at(1) == Some(&Tok::LParen) => {
            cur.next();
            cur.next();
            Ok(Parsed::Atom(AtomPattern { predicate: name, terms: parse_pterm_list(cur)? }))
        }
        Some(Tok::Ident(name)) if name.starts_with('_') => {
            cur.next();
            Ok(Parsed::Atom(AtomPattern { predicate: name, terms: vec![] }))
        }
        Some(_) => Ok(Parsed::Term(parse_pterm(cur)?)),
        None => Err(cur.error("unexpected end of input").into()),
    }
}

fn parse_pterm_list(cur: &mut Cursor) -> Result<Vec<PTerm>, ReasonerError> {
    let mut items = vec![parse_pterm(cur)?];
    loop {
        match cur.peek() {
            Some(Tok::Comma) => {
                cur.next();
                items.push(parse_pterm(cur)?);
            }
            Some(Tok::RParen) => {
                cur.next();
                return Ok(items);
            }
            Some(t) => return Err(cur.error(format!("expected `,` or `)`, found {}", t.describe())).into()),
            None => return Err(cur.error("unbalanced parenthesis: expected `)`").into()),
        }
    }
}

fn parse_pterm(cur: &mut Cursor) -> Result<PTerm, ReasonerError> {
    match cur.peek().cloned() {
        Some(Tok::Var(v)) => {
            cur.next();
            Ok(PTerm::Var(v))
        }
        Some(Tok::Wildcard) => {
            cur.next();
            Ok(PTerm::Wildcard)
        }
        Some(Tok::Ident(name)) if !name.starts_with('_') => {
            cur.next();
            Ok(PTerm::Const(Term::Symbol(name)))
        }
        Some(Tok::Str(s)) => {
            cur.next();
            Ok(PTerm::Const(Term::Str(s)))
        }
        Some(Tok::LParen) => {
            cur.next();
            Ok(PTerm::Tuple(parse_pterm_list(cur)?))
        }
        Some(t) => Err(cur.error(format!("expected term, found {}", t.describe())).into()),
        None => Err(cur.error("expected term, found end of input").into()),
    }
}

fn check_rule(rule: &Rule, builtins: &BuiltinRegistry, line: usize) -> Result<(), ReasonerError> {
    for el in &rule.body {
        if let BodyElement::Guard(g) = el {
            for op in [&g.lhs, &g.rhs] {
                if let Operand::Builtin(name, _) = op {
                    if !builtins.contains(name) {
                        return Err(ReasonerError::UnknownBuiltin { name: name.clone(), line });
                    }
                }
            }
        }
    }

    let mut head_vars = Vec::new();
    for t in &rule.head.terms {
        if t.has_wildcard() {
            return Err(ReasonerError::Safety {
                rule: rule.to_string(),
                message: "`_` is not allowed in a rule head".into(),
            });
        }
        t.collect_vars(&mut head_vars);
    }

    // Guards may only use variables bound by positive atoms to their left.
    let mut bound: HashSet<String> = HashSet::new();
    for el in &rule.body {
        match el {
            BodyElement::Atom(a) => {
                let mut vs = Vec::new();
                for t in &a.terms {
                    t.collect_vars(&mut vs);
                }
                bound.extend(vs);
            }
            BodyElement::Guard(g) => {
                let mut vs = Vec::new();
                g.lhs.collect_vars(&mut vs);
                g.rhs.collect_vars(&mut vs);
                if let Some(v) = vs.into_iter().find(|v| !bound.contains(v)) {
                    return Err(ReasonerError::Safety {
                        rule: rule.to_string(),
                        message: format!("guard variable {v} is not bound by an earlier atom"),
                    });
                }
            }
        }
    }
    if let Some(v) = head_vars.into_iter().find(|v| !bound.contains(v)) {
        return Err(ReasonerError::Safety {
            rule: rule.to_string(),
            message: format!("head variable {v} does not occur in a positive body atom"),
        });
    }
    Ok(())
}
