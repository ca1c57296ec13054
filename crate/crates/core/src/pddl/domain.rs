use std::collections::{HashMap, HashSet};

use super::sexpr::{parse_one, SExpr};
use super::{ActionSchema, Arg, Domain, Literal, PddlError, PredicateDecl, TypedName};

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = parse_one(text)?;
    let items = match root.as_list() {
        Some(items) if root.head() == Some("define") => items,
        _ => return Err(root.error("expected `(define (domain ...) ...)`")),
    };
    let name = match items.get(1).and_then(SExpr::as_list) {
        Some([kw, n]) if kw.as_atom() == Some("domain") => {
            n.as_atom().ok_or_else(|| n.error("domain name must be a symbol"))?.to_string()
        }
        _ => return Err(root.error("expected `(domain <name>)`")),
    };

    let mut domain =
        Domain { name, requirements: vec![], types: vec![], constants: vec![], predicates: vec![], actions: vec![] };
    for section in &items[2..] {
        let list = section.as_list().ok_or_else(|| section.error("expected a section"))?;
        match section.head() {
            Some(":requirements") => {
                for r in &list[1..] {
                    domain.requirements.push(r.as_atom().ok_or_else(|| r.error("bad requirement"))?.into());
                }
            }
            Some(":types") => domain.types = typed_list(&list[1..], false)?,
            Some(":constants") => domain.constants = typed_list(&list[1..], false)?,
            Some(":predicates") => {
                for p in &list[1..] {
                    let pl = p.as_list().filter(|l| !l.is_empty()).ok_or_else(|| p.error("bad predicate"))?;
                    let name = pl[0].as_atom().ok_or_else(|| p.error("bad predicate name"))?.to_string();
                    domain.predicates.push(PredicateDecl { name, params: typed_list(&pl[1..], true)? });
                }
            }
            Some(":action") => domain.actions.push(parse_action(section, list)?),
            Some(other) => return Err(section.error(format!("unsupported section `{other}`"))),
            None => return Err(section.error("expected a section keyword")),
        }
    }
    validate(&domain)?;
    Ok(domain)
}

/// `a b - t c` style lists. With `vars`, every name must start with `?`,
/// which is stripped.
pub(super) fn typed_list(items: &[SExpr], vars: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let it = &items[i];
        let text = it.as_atom().ok_or_else(|| it.error("expected a name"))?;
        if text == "-" {
            let ty = items.get(i + 1).and_then(SExpr::as_atom).ok_or_else(|| it.error("expected a type after `-`"))?;
            if pending.is_empty() {
                return Err(it.error("`-` without preceding names"));
            }
            out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
            i += 2;
            continue;
        }
        let name = if vars {
            text.strip_prefix('?').ok_or_else(|| it.error(format!("expected a `?variable`, found `{text}`")))?
        } else {
            text
        };
        pending.push(name.to_string());
        i += 1;
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, "object")));
    Ok(out)
}

fn parse_action(section: &SExpr, list: &[SExpr]) -> Result<ActionSchema, PddlError> {
    let name = list.get(1).and_then(SExpr::as_atom).ok_or_else(|| section.error("expected action name"))?.to_string();
    let mut action = ActionSchema { name, parameters: vec![], precondition: vec![], effect: vec![] };
    let mut i = 2;
    while i < list.len() {
        let key = list[i].as_atom().ok_or_else(|| list[i].error("expected an action keyword"))?;
        let value = list.get(i + 1).ok_or_else(|| list[i].error(format!("missing value for `{key}`")))?;
        match key {
            ":parameters" => {
                action.parameters = typed_list(value.as_list().ok_or_else(|| value.error("expected a list"))?, true)?
            }
            ":precondition" => action.precondition = conjunction(value)?,
            ":effect" => action.effect = conjunction(value)?,
            other => return Err(list[i].error(format!("unsupported action keyword `{other}`"))),
        }
        i += 2;
    }
    Ok(action)
}

/// `(and l1 ... ln)`, a single literal, or `()`.
pub(super) fn conjunction(e: &SExpr) -> Result<Vec<Literal>, PddlError> {
    let items = e.as_list().ok_or_else(|| e.error("expected a formula"))?;
    match e.head() {
        Some("and") => items[1..].iter().map(literal).collect(),
        None if items.is_empty() => Ok(vec![]),
        _ => Ok(vec![literal(e)?]),
    }
}

fn literal(e: &SExpr) -> Result<Literal, PddlError> {
    let items = e.as_list().filter(|l| !l.is_empty()).ok_or_else(|| e.error("expected a literal"))?;
    match e.head() {
        Some("not") => {
            let [_, inner] = items else {
                return Err(e.error("`not` takes exactly one atom"));
            };
            let mut lit = literal(inner)?;
            if !lit.positive {
                return Err(e.error("nested negation"));
            }
            lit.positive = false;
            Ok(lit)
        }
        Some("and" | "or" | "forall" | "exists" | "when" | "imply") => {
            Err(e.error(format!("`{}` is not supported here", e.head().unwrap_or_default())))
        }
        Some(pred) => {
            let args = items[1..]
                .iter()
                .map(|a| {
                    let t = a.as_atom().ok_or_else(|| a.error("expected an argument"))?;
                    Ok(match t.strip_prefix('?') {
                        Some(v) => Arg::Var(v.to_string()),
                        None => Arg::Const(t.to_string()),
                    })
                })
                .collect::<Result<_, PddlError>>()?;
            Ok(Literal { positive: true, predicate: pred.to_string(), args })
        }
        None => Err(e.error("expected a predicate name")),
    }
}

fn validate(d: &Domain) -> Result<(), PddlError> {
    let mut seen = HashSet::new();
    for t in &d.types {
        if !seen.insert(t.name.as_str()) {
            return Err(PddlError::Duplicate(t.name.clone()));
        }
    }
    for t in &d.types {
        if !d.has_type(&t.ty) {
            return Err(PddlError::UndeclaredType(t.ty.clone()));
        }
    }
    let mut constants: HashMap<&str, &str> = HashMap::new();
    for c in &d.constants {
        if !d.has_type(&c.ty) {
            return Err(PddlError::UndeclaredType(c.ty.clone()));
        }
        if constants.insert(&c.name, &c.ty).is_some() {
            return Err(PddlError::Duplicate(c.name.clone()));
        }
    }
    let mut preds = HashSet::new();
    for p in &d.predicates {
        if !preds.insert(p.name.as_str()) {
            return Err(PddlError::Duplicate(p.name.clone()));
        }
        if let Some(t) = p.params.iter().find(|t| !d.has_type(&t.ty)) {
            return Err(PddlError::UndeclaredType(t.ty.clone()));
        }
    }
    let mut action_names = HashSet::new();
    for a in &d.actions {
        if !action_names.insert(a.name.as_str()) {
            return Err(PddlError::Duplicate(a.name.clone()));
        }
        let mut params: HashMap<&str, &str> = HashMap::new();
        for p in &a.parameters {
            if !d.has_type(&p.ty) {
                return Err(PddlError::UndeclaredType(p.ty.clone()));
            }
            if params.insert(&p.name, &p.ty).is_some() {
                return Err(PddlError::Duplicate(format!("?{} in {}", p.name, a.name)));
            }
        }
        let context = format!("action {}", a.name);
        for lit in a.precondition.iter().chain(&a.effect) {
            let decl = d.predicate(&lit.predicate).ok_or_else(|| PddlError::UndeclaredPredicate {
                predicate: lit.predicate.clone(),
                context: context.clone(),
            })?;
            if decl.params.len() != lit.args.len() {
                return Err(PddlError::ArityMismatch {
                    predicate: lit.predicate.clone(),
                    expected: decl.params.len(),
                    found: lit.args.len(),
                    context,
                });
            }
            for (arg, want) in lit.args.iter().zip(&decl.params) {
                let (name, ty) = match arg {
                    Arg::Var(v) => (
                        format!("?{v}"),
                        *params.get(v.as_str()).ok_or_else(|| PddlError::UndeclaredVariable {
                            name: v.clone(),
                            context: context.clone(),
                        })?,
                    ),
                    Arg::Const(c) => (
                        c.clone(),
                        *constants.get(c.as_str()).ok_or_else(|| PddlError::UndeclaredConstant {
                            name: c.clone(),
                            context: context.clone(),
                        })?,
                    ),
                };
                if !d.is_subtype(ty, &want.ty) {
                    return Err(PddlError::TypeMismatch {
                        name,
                        expected: want.ty.clone(),
                        found: ty.to_string(),
                        context,
                    });
                }
            }
        }
    }
    Ok(())
}
