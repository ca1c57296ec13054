//! Goal catalog: supported goals, their required arguments and argument
//! types, and the mapping from materialized predicates to PDDL predicates
//! and value types. Also renders the translation prompt.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::reasoner::parse_date;

/// The catalog shipped with the crate.
pub const BUNDLED_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("catalog schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("dangling reference at `{path}`: `{target}` is not declared")]
    DanglingReference { path: String, target: String },
    #[error("unknown goal `{0}`")]
    UnknownGoal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgTypeKind {
    Examples,
    PossibleValues,
}

/// Declared shape of normalized example values, checked at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueFormat {
    Date,
    DatePeriod,
    Amount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormalizedValue {
    Single(String),
    Tuple(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgType {
    pub name: String,
    pub kind: ArgTypeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<ValueFormat>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub examples: IndexMap<String, NormalizedValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub possible_values: Vec<String>,
}

/// One predicate produced by the domain rules for an argument, e.g.
/// `start_date(x, "01/01/2023", date)`, and the goal-condition predicate it
/// compiles to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterializedPredicate {
    pub predicate: String,
    pub value_type: String,
    pub pddl_predicate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MaterializedPredicate {
    /// Human label used when asking for the value, e.g. `start date`.
    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.predicate.replace('_', " "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub arg_type: String,
    pub pddl_value_type: String,
    pub materialized_predicates: Vec<MaterializedPredicate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalExample {
    pub query: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalDef {
    pub goal_id: String,
    /// Goal concept as named by the domain rules (`goal(x, <concept>)`).
    pub concept: String,
    /// Planning type of the goal object; defaults to `concept`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pddl_type: Option<String>,
    pub description: String,
    /// Third `_goal` argument that the rules require, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mention: Option<String>,
    /// Unary goal-condition predicate for goals without arguments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_predicate: Option<String>,
    pub args: Vec<ArgSpec>,
    #[serde(default)]
    pub examples: Vec<GoalExample>,
}

impl GoalDef {
    pub fn pddl_type(&self) -> &str {
        self.pddl_type.as_deref().unwrap_or(&self.concept)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InContextExample {
    pub goals: String,
    pub text: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub value_types: Vec<String>,
    pub arg_types: Vec<ArgType>,
    pub goals: Vec<GoalDef>,
    #[serde(default)]
    pub in_context_examples: Vec<InContextExample>,
}

/// Where an object's value comes from: the goal, argument and predicate
/// that the `goal_var + "_" + predicate` naming convention points at.
#[derive(Debug, Clone, Copy)]
pub struct ArgSlot<'a> {
    pub goal: &'a GoalDef,
    pub arg: &'a ArgSpec,
    pub predicate: &'a MaterializedPredicate,
}

pub fn load_catalog(document: &str) -> Result<Catalog, CatalogError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let catalog: Catalog = serde_path_to_error::deserialize(de)
        .map_err(|e| CatalogError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    catalog.validate()?;
    Ok(catalog)
}

impl Catalog {
    pub fn bundled() -> Catalog {
        load_catalog(BUNDLED_CATALOG).expect("bundled catalog is valid")
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let schema = |path: String, message: String| CatalogError::Schema { path, message };

        let mut arg_type_names = HashSet::new();
        for (i, at) in self.arg_types.iter().enumerate() {
            let path = format!("arg_types[{i}]");
            if !arg_type_names.insert(at.name.as_str()) {
                return Err(schema(path, format!("duplicate arg type `{}`", at.name)));
            }
            match at.kind {
                ArgTypeKind::Examples if at.examples.is_empty() || !at.possible_values.is_empty() => {
                    return Err(schema(path, "kind `examples` requires only `examples`".into()));
                }
                ArgTypeKind::PossibleValues if at.possible_values.is_empty() || !at.examples.is_empty() => {
                    return Err(schema(path, "kind `possible_values` requires only `possible_values`".into()));
                }
                _ => {}
            }
            if let Some(format) = at.format {
                for (surface, value) in &at.examples {
                    check_format(format, value).map_err(|m| schema(format!("{path}.examples.{surface}"), m))?;
                }
            }
        }

        let value_types: HashSet<&str> = self.value_types.iter().map(String::as_str).collect();
        let mut goal_ids = HashSet::new();
        let mut concepts = HashSet::new();
        let mut pred_map: BTreeMap<&str, &str> = BTreeMap::new();
        for (gi, goal) in self.goals.iter().enumerate() {
            let path = format!("goals[{gi}]");
            if !goal_ids.insert(goal.goal_id.as_str()) {
                return Err(schema(format!("{path}.goal_id"), format!("duplicate goal `{}`", goal.goal_id)));
            }
            if !concepts.insert(goal.concept.as_str()) {
                return Err(schema(format!("{path}.concept"), format!("duplicate concept `{}`", goal.concept)));
            }
            if goal.args.is_empty() && goal.goal_predicate.is_none() {
                return Err(schema(path, "a goal without arguments needs a `goal_predicate`".into()));
            }
            let mut arg_names = HashSet::new();
            for (ai, arg) in goal.args.iter().enumerate() {
                let apath = format!("{path}.args[{ai}]");
                if !arg_names.insert(arg.name.as_str()) {
                    return Err(schema(apath, format!("duplicate argument `{}`", arg.name)));
                }
                if !arg_type_names.contains(arg.arg_type.as_str()) {
                    return Err(CatalogError::DanglingReference {
                        path: format!("{apath}.arg_type"),
                        target: arg.arg_type.clone(),
                    });
                }
                if !value_types.contains(arg.pddl_value_type.as_str()) {
                    return Err(CatalogError::DanglingReference {
                        path: format!("{apath}.pddl_value_type"),
                        target: arg.pddl_value_type.clone(),
                    });
                }
                if arg.materialized_predicates.is_empty() {
                    return Err(schema(apath, "at least one materialized predicate is required".into()));
                }
                for (pi, mp) in arg.materialized_predicates.iter().enumerate() {
                    let ppath = format!("{apath}.materialized_predicates[{pi}]");
                    match pred_map.insert(&mp.predicate, &mp.pddl_predicate) {
                        Some(prev) if prev != mp.pddl_predicate => {
                            return Err(schema(
                                ppath,
                                format!("`{}` maps to both `{prev}` and `{}`", mp.predicate, mp.pddl_predicate),
                            ));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    pub fn goal(&self, goal_id: &str) -> Option<&GoalDef> {
        self.goals.iter().find(|g| g.goal_id == goal_id)
    }

    pub fn goal_by_concept(&self, concept: &str) -> Option<&GoalDef> {
        self.goals.iter().find(|g| g.concept == concept)
    }

    pub fn arg_type(&self, name: &str) -> Option<&ArgType> {
        self.arg_types.iter().find(|a| a.name == name)
    }

    /// The goal's arguments in declaration order.
    pub fn required_args(&self, goal_id: &str) -> Result<&[ArgSpec], CatalogError> {
        self.goal(goal_id).map(|g| g.args.as_slice()).ok_or_else(|| CatalogError::UnknownGoal(goal_id.to_string()))
    }

    /// Every (goal, arg, predicate) triple in catalog order.
    pub fn slots(&self) -> impl Iterator<Item = ArgSlot<'_>> {
        self.goals.iter().flat_map(|goal| {
            goal.args.iter().flat_map(move |arg| {
                arg.materialized_predicates.iter().map(move |predicate| ArgSlot { goal, arg, predicate })
            })
        })
    }

    /// Slot whose materialized predicate name is the longest suffix
    /// `_<predicate>` of `object`.
    pub fn slot_for_object(&self, object: &str) -> Option<ArgSlot<'_>> {
        self.slots()
            .filter(|s| {
                object.len() > s.predicate.predicate.len() + 1
                    && object.ends_with(&s.predicate.predicate)
                    && object.as_bytes()[object.len() - s.predicate.predicate.len() - 1] == b'_'
            })
            .max_by_key(|s| s.predicate.predicate.len())
    }

    /// Slot for a goal-condition predicate (first match in catalog order).
    pub fn slot_for_pddl_predicate(&self, pddl_predicate: &str) -> Option<ArgSlot<'_>> {
        self.slots().find(|s| s.predicate.pddl_predicate == pddl_predicate)
    }

    /// Display label for an object created by task generation.
    pub fn label_for_object(&self, object: &str) -> String {
        self.slot_for_object(object).map(|s| s.predicate.display_label()).unwrap_or_else(|| object.replace('_', " "))
    }

    /// The goals block of the translation prompt.
    pub fn goals_block(&self) -> String {
        let mut out = String::new();
        for at in &self.arg_types {
            let body = match at.kind {
                ArgTypeKind::Examples => json!({ "examples": at.examples }),
                ArgTypeKind::PossibleValues => json!({ "possible_values": at.possible_values }),
            };
            let _ = writeln!(out, "{} = {}\n", at.name, body);
        }
        let goals: Vec<_> = self
            .goals
            .iter()
            .map(|g| {
                let required: Vec<_> = g
                    .args
                    .iter()
                    .map(|a| json!({ "name": a.name, "description": a.description, "type": a.arg_type }))
                    .collect();
                let examples: Vec<_> = g.examples.iter().map(|e| json!({ e.query.clone(): e.answer })).collect();
                json!({
                    "type": g.goal_id,
                    "description": g.description,
                    "required information": required,
                    "examples": examples,
                })
            })
            .collect();
        out.push_str(&serde_json::to_string_pretty(&goals).expect("goal block serializes"));
        out
    }

    /// Translation prompt: instructions, in-context examples, the domain
    /// goals, then the query.
    pub fn build_prompt(&self, query: &str) -> String {
        let mut p = String::from(PROMPT_INSTRUCTIONS);
        p.push_str("\nBelow a few examples of goals, text and the answer.\n\n");
        for ex in &self.in_context_examples {
            let _ = write!(
                p,
                "Goals: \"\"\"{}\"\"\"\n\nText: \"\"\"{}\"\"\"\nAnswer:\n{}\n\n",
                ex.goals, ex.text, ex.answer
            );
        }
        let _ = write!(p, "Goals: \"\"\"{}\"\"\"\n\nText: \"\"\"{}\"\"\"\nAnswer:", self.goals_block(), query);
        p
    }
}

const PROMPT_INSTRUCTIONS: &str = "Given goal types with their required information. Extract from the provided user query:
1. The one or more goals of the query from the given set of goals. Represent each extracted goal <x> of type <T> as \"_goal(<x>, <T>).\".
2. If the user query contains any required information for the extracted goal, then extract that too. While doing so, if possible values are defined for the argument, then choose one from them if applicable.
";

fn check_format(format: ValueFormat, value: &NormalizedValue) -> Result<(), String> {
    match (format, value) {
        (ValueFormat::Date, NormalizedValue::Single(d)) => parse_date(d).map(|_| ()),
        (ValueFormat::DatePeriod, NormalizedValue::Tuple(ds)) if ds.len() == 2 => {
            ds.iter().try_for_each(|d| parse_date(d).map(|_| ()))
        }
        (ValueFormat::Amount, NormalizedValue::Single(a)) if is_amount(a) => Ok(()),
        (f, v) => Err(format!("{v:?} does not match format {f:?}")),
    }
}

/// `^[0-9]+\.[0-9]{2}$`
pub fn is_amount(s: &str) -> bool {
    match s.split_once('.') {
        Some((int, frac)) => {
            !int.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.len() == 2
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_loads() {
        let c = Catalog::bundled();
        assert_eq!(c.goals.len(), 9);
        assert_eq!(c.goal("goal_1").unwrap().concept, "profit_loss_report");
        assert_eq!(c.goal_by_concept("contact_us").unwrap().pddl_type(), "contact");
        assert_eq!(c.in_context_examples.len(), 5);
    }

    #[test]
    fn required_args_examples() {
        let c = Catalog::bundled();
        let args = c.required_args("goal_1").unwrap();
        assert_eq!(args.len(), 1);
        assert_eq!(args[0].name, "report_period");
        let pairs: Vec<_> = args[0]
            .materialized_predicates
            .iter()
            .map(|m| (m.predicate.as_str(), m.value_type.as_str(), m.pddl_predicate.as_str()))
            .collect();
        assert_eq!(pairs, vec![("start_date", "date", "report_start_date"), ("end_date", "date", "report_end_date")]);
        assert!(c.required_args("goal_7").unwrap().is_empty());
        assert_eq!(c.required_args("goal_99"), Err(CatalogError::UnknownGoal("goal_99".into())));
    }

    fn mutate(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value = serde_json::from_str(BUNDLED_CATALOG).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn dangling_arg_type() {
        let doc = mutate(|v| v["goals"][0]["args"][0]["arg_type"] = json!("arg_type_unknown"));
        assert!(matches!(
            load_catalog(&doc),
            Err(CatalogError::DanglingReference { ref target, .. }) if target == "arg_type_unknown"
        ));
        let doc = mutate(|v| v["goals"][3]["args"][1]["pddl_value_type"] = json!("money"));
        assert!(matches!(load_catalog(&doc), Err(CatalogError::DanglingReference { .. })));
    }

    #[test]
    fn duplicate_goal_is_schema_error() {
        let doc = mutate(|v| v["goals"][1]["goal_id"] = json!("goal_1"));
        assert!(matches!(load_catalog(&doc), Err(CatalogError::Schema { ref path, .. }) if path == "goals[1].goal_id"));
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let doc = mutate(|v| v["goals"][2]["args"][0]["materialized_predicates"][0]["pddl_predicate"] = json!(7));
        match load_catalog(&doc) {
            Err(CatalogError::Schema { path, .. }) => {
                assert_eq!(path, "goals[2].args[0].materialized_predicates[0].pddl_predicate")
            }
            other => panic!("unexpected {other:?}"),
        }
        let doc = mutate(|v| v["arg_types"][2]["examples"]["$2"] = json!("2"));
        assert!(matches!(load_catalog(&doc), Err(CatalogError::Schema { .. })));
        let doc = mutate(|v| v["arg_types"][0]["examples"]["fy21"] = json!(["02/30/2021", "12/31/2021"]));
        assert!(matches!(load_catalog(&doc), Err(CatalogError::Schema { .. })));
    }

    #[test]
    fn prompt_shape() {
        let c = Catalog::bundled();
        let p = c.build_prompt("Profit and loss report");
        let lines: Vec<_> = p.lines().collect();
        assert_eq!(lines[lines.len() - 2], "Text: \"\"\"Profit and loss report\"\"\"");
        assert_eq!(lines[lines.len() - 1], "Answer:");
        assert!(p.contains("_goal(x, fruits_goods, apple)."));
        assert!(p.starts_with("Given goal types with their required information."));
        let examples_at = p.find("show me red apples.").unwrap();
        let goals_at = p.find("\"goal_1\"").unwrap();
        assert!(examples_at < goals_at);
        assert_eq!(p, c.build_prompt("Profit and loss report"));
    }

    #[test]
    fn prompt_for_empty_goal_list() {
        let mut c = Catalog::bundled();
        c.goals.clear();
        let p = c.build_prompt("hello");
        assert!(p.contains("[]"));
        assert!(p.ends_with("Text: \"\"\"hello\"\"\"\nAnswer:"));
    }

    #[test]
    fn object_labels() {
        let c = Catalog::bundled();
        assert_eq!(c.label_for_object("x_start_date"), "start date");
        assert_eq!(c.label_for_object("y_contact_topic"), "contact topic");
        assert_eq!(c.label_for_object("goal_a_end_date"), "end date");
        assert_eq!(c.label_for_object("mystery_obj"), "mystery obj");
    }

    #[test]
    fn amounts() {
        assert!(is_amount("75.00"));
        assert!(!is_amount("75"));
        assert!(!is_amount(".50"));
        assert!(!is_amount("1.5"));
    }
}
