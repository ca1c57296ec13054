use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{BindingEnv, GroundAtom, TaskProblem, TypedName};
use crate::asp::{FactSet, Term};
use crate::catalog::Catalog;
use crate::reasoner::extract_errors;

pub const DEFAULT_DOMAIN_NAME: &str = "gen-orch-planner";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("goal `{object}` has concept `{concept}`, which the catalog does not define")]
    UnknownConcept { object: String, concept: String },
    #[error("`{object}` has conflicting values `{first}` and `{second}`")]
    ConflictingValue { object: String, first: String, second: String },
    #[error("invalid value `{value}` for `{object}`: {reason}")]
    InvalidValue { object: String, value: String, reason: String },
    #[error("domain constraint violated: {}", .0.join("; "))]
    ConstraintViolation(Vec<String>),
}

/// What a materialized argument predicate supplies for one argument object.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Supplied {
    Value(String),
    /// The output of another goal.
    Goal(String),
}

/// Builds the planning task for a materialized representation.
///
/// Every goal `x` becomes a `var` object typed with its goal concept; every
/// required argument becomes `x_<predicate>` with a goal condition linking
/// it to `x`. Known values go to the returned [`BindingEnv`] and mark the
/// object with `has_value`. An argument whose value is another goal
/// variable `y` links `x` to `y` directly, so the plan must produce `y` first.
pub fn generate_task(
    materialized: &FactSet,
    catalog: &Catalog,
    problem_name: &str,
) -> Result<(TaskProblem, BindingEnv), TaskError> {
    let errors = extract_errors(materialized);
    if !errors.is_empty() {
        return Err(TaskError::ConstraintViolation(errors));
    }

    // Goals in canonical (sorted) order; a BTreeSet makes this independent
    // of how the fact set was built.
    let goals: BTreeSet<(String, String)> = materialized
        .with_predicate("goal")
        .filter(|a| a.arity() == 2)
        .filter_map(|a| Some((a.terms[0].as_symbol()?.to_string(), a.terms[1].as_symbol()?.to_string())))
        .collect();
    let goal_vars: BTreeSet<&str> = goals.iter().map(|(x, _)| x.as_str()).collect();

    let mut var_types: Vec<String> = Vec::new();
    let mut vars: Vec<String> = Vec::new();
    let mut init: Vec<GroundAtom> = Vec::new();
    let mut goal: Vec<GroundAtom> = Vec::new();
    let mut env = BindingEnv::new();

    fn push_unique<T: PartialEq>(v: &mut Vec<T>, item: T) {
        if !v.contains(&item) {
            v.push(item);
        }
    }

    for (x, concept) in &goals {
        let def = catalog
            .goal_by_concept(concept)
            .ok_or_else(|| TaskError::UnknownConcept { object: x.clone(), concept: concept.clone() })?;
        push_unique(&mut vars, x.clone());
        push_unique(&mut var_types, def.pddl_type().to_string());
        push_unique(&mut init, GroundAtom::new("has_type", [x.as_str(), def.pddl_type()]));
        if let Some(p) = &def.goal_predicate {
            push_unique(&mut goal, GroundAtom::new(p.as_str(), [x.as_str()]));
        }

        for arg in &def.args {
            let vt = arg.pddl_value_type.as_str();
            for mp in &arg.materialized_predicates {
                let arg_var = format!("{x}_{}", mp.predicate);
                match supplied_value(materialized, x, &mp.predicate, &arg_var, &goal_vars)? {
                    Some(Supplied::Goal(y)) => {
                        push_unique(&mut var_types, vt.to_string());
                        push_unique(&mut init, GroundAtom::new("has_type", [y.as_str(), vt]));
                        push_unique(&mut goal, GroundAtom::new(mp.pddl_predicate.as_str(), [x.as_str(), &y]));
                    }
                    supplied => {
                        push_unique(&mut vars, arg_var.clone());
                        push_unique(&mut var_types, vt.to_string());
                        push_unique(&mut init, GroundAtom::new("has_type", [arg_var.as_str(), vt]));
                        if let Some(Supplied::Value(v)) = supplied {
                            push_unique(&mut init, GroundAtom::new("has_value", [arg_var.as_str()]));
                            env.insert(arg_var.clone(), v);
                        }
                        push_unique(&mut goal, GroundAtom::new(mp.pddl_predicate.as_str(), [x.as_str(), &arg_var]));
                    }
                }
            }
        }
    }

    let objects = var_types
        .into_iter()
        .map(|t| TypedName::new(t, "var_type"))
        .chain(vars.into_iter().map(|v| TypedName::new(v, "var")))
        .collect();
    let task = TaskProblem {
        name: problem_name.to_string(),
        domain_name: DEFAULT_DOMAIN_NAME.to_string(),
        objects,
        init,
        goal,
    };
    Ok((task, env))
}

/// The value of `predicate(x, V, _)`, if any; at most one distinct value.
fn supplied_value(
    materialized: &FactSet,
    x: &str,
    predicate: &str,
    arg_var: &str,
    goal_vars: &BTreeSet<&str>,
) -> Result<Option<Supplied>, TaskError> {
    let mut values: BTreeMap<String, Supplied> = BTreeMap::new();
    for atom in materialized.with_predicate(predicate) {
        if atom.arity() != 3 || atom.terms[0].as_symbol() != Some(x) {
            continue;
        }
        let supplied = match &atom.terms[1] {
            Term::Str(s) if s.trim().is_empty() => {
                return Err(TaskError::InvalidValue {
                    object: arg_var.to_string(),
                    value: s.clone(),
                    reason: "empty value".into(),
                })
            }
            Term::Str(s) => Supplied::Value(s.clone()),
            Term::Symbol(y) if y == x => {
                return Err(TaskError::InvalidValue {
                    object: arg_var.to_string(),
                    value: y.clone(),
                    reason: "a goal cannot consume its own output".into(),
                })
            }
            Term::Symbol(y) if goal_vars.contains(y.as_str()) => Supplied::Goal(y.clone()),
            other => {
                return Err(TaskError::InvalidValue {
                    object: arg_var.to_string(),
                    value: other.to_string(),
                    reason: "expected a quoted value or a goal variable".into(),
                })
            }
        };
        values.insert(atom.terms[1].to_string(), supplied);
    }
    let mut it = values.into_iter();
    let first = it.next();
    if let (Some((a, _)), Some((b, _))) = (&first, it.next()) {
        return Err(TaskError::ConflictingValue { object: arg_var.to_string(), first: a.clone(), second: b.clone() });
    }
    Ok(first.map(|(_, s)| s))
}
