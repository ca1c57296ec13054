use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::domain::{conjunction, typed_list};
use super::sexpr::{parse_one, SExpr};
use super::{Arg, Domain, GroundAtom, PddlError, TaskProblem};

pub fn parse_task(text: &str) -> Result<TaskProblem, PddlError> {
    let root = parse_one(text)?;
    let items = match root.as_list() {
        Some(items) if root.head() == Some("define") => items,
        _ => return Err(root.error("expected `(define (problem ...) ...)`")),
    };
    let name = match items.get(1).and_then(SExpr::as_list) {
        Some([kw, n]) if kw.as_atom() == Some("problem") => {
            n.as_atom().ok_or_else(|| n.error("problem name must be a symbol"))?.to_string()
        }
        _ => return Err(root.error("expected `(problem <name>)`")),
    };
    let mut domain_name = None;
    let mut task = TaskProblem { name, domain_name: String::new(), objects: vec![], init: vec![], goal: vec![] };
    for section in &items[2..] {
        let list = section.as_list().ok_or_else(|| section.error("expected a section"))?;
        match section.head() {
            Some(":domain") => match list {
                [_, n] => domain_name = Some(n.as_atom().ok_or_else(|| n.error("bad domain name"))?.to_string()),
                _ => return Err(section.error("expected `(:domain <name>)`")),
            },
            Some(":objects") => task.objects = typed_list(&list[1..], false)?,
            Some(":init") => {
                for a in &list[1..] {
                    task.init.push(ground(a)?);
                }
            }
            Some(":goal") => {
                let [_, formula] = list else {
                    return Err(section.error("expected `(:goal <formula>)`"));
                };
                for lit in conjunction(formula)? {
                    if !lit.positive {
                        return Err(formula.error("negative goals are not supported"));
                    }
                    let args = lit
                        .args
                        .into_iter()
                        .map(|a| match a {
                            Arg::Const(c) => Ok(c),
                            Arg::Var(v) => Err(formula.error(format!("variable `?{v}` in goal"))),
                        })
                        .collect::<Result<_, _>>()?;
                    task.goal.push(GroundAtom { predicate: lit.predicate, args });
                }
            }
            Some(other) => return Err(section.error(format!("unsupported section `{other}`"))),
            None => return Err(section.error("expected a section keyword")),
        }
    }
    task.domain_name = domain_name.ok_or_else(|| root.error("missing `(:domain <name>)`"))?;

    let mut seen = HashSet::new();
    for o in &task.objects {
        if !seen.insert(o.name.as_str()) {
            return Err(PddlError::Duplicate(o.name.clone()));
        }
    }
    let mut seen = HashSet::new();
    for a in &task.init {
        if !seen.insert(a) {
            return Err(PddlError::Duplicate(a.to_string()));
        }
    }
    Ok(task)
}

fn ground(e: &SExpr) -> Result<GroundAtom, PddlError> {
    let items = e.as_list().filter(|l| !l.is_empty()).ok_or_else(|| e.error("expected a ground atom"))?;
    let predicate = items[0].as_atom().ok_or_else(|| e.error("expected a predicate name"))?;
    if predicate == "not" {
        return Err(e.error("negative literals are not allowed in the initial state"));
    }
    let args = items[1..]
        .iter()
        .map(|a| match a.as_atom() {
            Some(t) if !t.starts_with('?') => Ok(t.to_string()),
            _ => Err(a.error("expected an object name")),
        })
        .collect::<Result<_, _>>()?;
    Ok(GroundAtom { predicate: predicate.to_string(), args })
}

/// Parses a task and checks it against `domain`: object types declared,
/// atoms over declared predicates with matching arity and argument types.
pub fn parse_task_checked(text: &str, domain: &Domain) -> Result<TaskProblem, PddlError> {
    let task = parse_task(text)?;
    check_task(&task, domain)?;
    Ok(task)
}

pub(crate) fn check_task(task: &TaskProblem, domain: &Domain) -> Result<(), PddlError> {
    if task.domain_name != domain.name {
        return Err(PddlError::DomainMismatch { task: task.domain_name.clone(), domain: domain.name.clone() });
    }
    let mut types: HashMap<&str, &str> = domain.constants.iter().map(|c| (c.name.as_str(), c.ty.as_str())).collect();
    for o in &task.objects {
        if !domain.has_type(&o.ty) {
            return Err(PddlError::UndeclaredType(o.ty.clone()));
        }
        types.insert(&o.name, &o.ty);
    }
    for (section, atoms) in [("init", &task.init), ("goal", &task.goal)] {
        for atom in atoms {
            let context = format!("{section} atom {atom}");
            let decl = domain.predicate(&atom.predicate).ok_or_else(|| PddlError::UndeclaredPredicate {
                predicate: atom.predicate.clone(),
                context: context.clone(),
            })?;
            if decl.params.len() != atom.args.len() {
                return Err(PddlError::ArityMismatch {
                    predicate: atom.predicate.clone(),
                    expected: decl.params.len(),
                    found: atom.args.len(),
                    context,
                });
            }
            for (arg, want) in atom.args.iter().zip(&decl.params) {
                let ty = types
                    .get(arg.as_str())
                    .ok_or_else(|| PddlError::UndeclaredConstant { name: arg.clone(), context: context.clone() })?;
                if !domain.is_subtype(ty, &want.ty) {
                    return Err(PddlError::TypeMismatch {
                        name: arg.clone(),
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

/// Canonical text. Objects are written as runs of consecutive objects of the
/// same type, so parsing the output preserves object order.
pub fn render_task(task: &TaskProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", task.name);
    let _ = writeln!(out, "    (:domain {})", task.domain_name);
    out.push_str("    (:objects\n");
    let mut i = 0;
    while i < task.objects.len() {
        let ty = &task.objects[i].ty;
        let run: Vec<&str> = task.objects[i..].iter().take_while(|o| &o.ty == ty).map(|o| o.name.as_str()).collect();
        i += run.len();
        let _ = writeln!(out, "        {} - {}", run.join(" "), ty);
    }
    out.push_str("    )\n    (:init\n");
    for a in &task.init {
        let _ = writeln!(out, "        {a}");
    }
    out.push_str("    )\n    (:goal (and\n");
    for a in &task.goal {
        let _ = writeln!(out, "        {a}");
    }
    out.push_str("    ))\n)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = "(define (problem example1)
    (:domain gen-orch-planner)
    (:objects
        profit_loss_report date - var_type
        x x_start_date x_end_date - var
    )
    (:init
        (has_type x profit_loss_report)
        (has_type x_start_date date)
        (has_type x_end_date date)
    )
    (:goal (and
        (report_start_date x x_start_date)
        (report_end_date x x_end_date)
    ))
)
";

    #[test]
    fn example1_round_trip() {
        let t = parse_task(EXAMPLE1).unwrap();
        assert_eq!(t.objects.len(), 5);
        assert_eq!(t.init.len(), 3);
        assert_eq!(t.goal[0], GroundAtom::new("report_start_date", ["x", "x_start_date"]));
        assert_eq!(render_task(&t), EXAMPLE1);
        assert_eq!(parse_task(&render_task(&t)).unwrap(), t);
        parse_task_checked(EXAMPLE1, &Domain::bundled()).unwrap();
    }

    #[test]
    fn empty_task_is_well_formed() {
        let t =
            TaskProblem { name: "empty".into(), domain_name: "d".into(), objects: vec![], init: vec![], goal: vec![] };
        let text = render_task(&t);
        assert_eq!(parse_task(&text).unwrap(), t);
    }

    #[test]
    fn missing_domain() {
        let text = EXAMPLE1.replace("(:domain gen-orch-planner)", "");
        assert!(matches!(parse_task(&text), Err(PddlError::Syntax { .. })));
    }

    #[test]
    fn checked_parse_errors() {
        let d = Domain::bundled();
        let bad_type = EXAMPLE1.replace("x_end_date - var", "x_end_date - thing");
        assert!(matches!(parse_task_checked(&bad_type, &d), Err(PddlError::UndeclaredType(t)) if t == "thing"));
        let bad_obj = EXAMPLE1.replace("(has_type x_end_date date)", "(has_type z date)");
        assert!(matches!(parse_task_checked(&bad_obj, &d), Err(PddlError::UndeclaredConstant { .. })));
        let bad_arity = EXAMPLE1.replace("(has_type x_end_date date)", "(has_value x_end_date date)");
        assert!(matches!(parse_task_checked(&bad_arity, &d), Err(PddlError::ArityMismatch { .. })));
        let bad_typing = EXAMPLE1.replace("(has_type x_end_date date)", "(has_type date x)");
        assert!(matches!(parse_task_checked(&bad_typing, &d), Err(PddlError::TypeMismatch { .. })));
    }
}
