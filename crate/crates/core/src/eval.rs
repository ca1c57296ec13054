//! Scoring generated plans against annotated queries.
//!
//! A dataset is JSON lines, one [`DatasetCase`] per line. Each ground-truth
//! call names an API and its entities; an entity value is a concrete string,
//! `MISSING` (the query does not supply it, so the plan must ask for it), or
//! `REF(n)` (the value is the output of ground-truth call `n`).
//!
//! A case succeeds when both the orchestration and every entity are right;
//! there is no partial credit.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, ValueFormat};
use crate::pddl::{Arg, BindingEnv, Domain};
use crate::pipeline::{Pipeline, PipelineError};
use crate::planner::{Plan, PlanStep, GET_INFO};
use crate::reasoner::parse_date;

/// The dataset shipped with the crate.
pub const BUNDLED_DATASET: &str = include_str!("../data/dataset.jsonl");

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("{path}: {message}")]
    Io { path: String, message: String, not_found: bool },
    #[error("dataset line {line}: {message}")]
    Schema { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EntityValue {
    Value(String),
    Missing,
    /// Output of the ground-truth call with this index.
    Ref(usize),
}

impl TryFrom<String> for EntityValue {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        if s == "MISSING" {
            return Ok(EntityValue::Missing);
        }
        if let Some(inner) = s.strip_prefix("REF(").and_then(|r| r.strip_suffix(')')) {
            return inner.parse().map(EntityValue::Ref).map_err(|_| format!("bad reference `{s}`"));
        }
        Ok(EntityValue::Value(s))
    }
}

impl From<EntityValue> for String {
    fn from(v: EntityValue) -> String {
        v.to_string()
    }
}

impl fmt::Display for EntityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityValue::Value(v) => f.write_str(v),
            EntityValue::Missing => f.write_str("MISSING"),
            EntityValue::Ref(i) => write!(f, "REF({i})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtEntity {
    pub name: String,
    pub value: EntityValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtCall {
    pub api: String,
    #[serde(default)]
    pub entities: Vec<GtEntity>,
}

/// `true` accepts any domain-constraint error; a string must appear in one
/// of the reported messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpectError {
    Any(bool),
    Message(String),
}

impl ExpectError {
    fn matches(&self, errors: &[String]) -> bool {
        match self {
            ExpectError::Any(b) => *b,
            ExpectError::Message(m) => errors.iter().any(|e| e.contains(m.as_str())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetCase {
    pub id: String,
    pub query: String,
    pub category: String,
    pub complete: bool,
    pub gt_calls: Vec<GtCall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_error: Option<ExpectError>,
}

impl DatasetCase {
    fn expects_error(&self) -> bool {
        !matches!(self.expect_error, None | Some(ExpectError::Any(false)))
    }

    fn entities(&self) -> impl Iterator<Item = &GtEntity> {
        self.gt_calls.iter().flat_map(|c| &c.entities)
    }

    fn check(&self) -> Result<(), String> {
        if self.gt_calls.is_empty() {
            return Err("at least one gt_call is required".into());
        }
        let missing = self.entities().any(|e| e.value == EntityValue::Missing);
        if self.complete && missing {
            return Err("complete case has a MISSING entity".into());
        }
        if !self.complete && !missing {
            return Err("incomplete case has no MISSING entity".into());
        }
        for (i, call) in self.gt_calls.iter().enumerate() {
            for e in &call.entities {
                if let EntityValue::Ref(r) = e.value {
                    if r >= self.gt_calls.len() || r == i {
                        return Err(format!("REF({r}) in call {i} does not name another call"));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetCase>, EvalError> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
        not_found: e.kind() == std::io::ErrorKind::NotFound,
    })?;
    parse_dataset(&text)
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_dataset(text: &str) -> Result<Vec<DatasetCase>, EvalError> {
    let mut cases: Vec<DatasetCase> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| EvalError::Schema { line: i + 1, message };
        let case: DatasetCase = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        case.check().map_err(schema)?;
        if cases.iter().any(|c| c.id == case.id) {
            return Err(schema(format!("duplicate id `{}`", case.id)));
        }
        cases.push(case);
    }
    Ok(cases)
}

/// `M/D/YY` or `M/D/YYYY` to `MM/DD/YYYY`; two-digit years are 20YY.
/// Anything else is returned trimmed.
pub fn normalize_date(text: &str) -> String {
    let t = text.trim();
    let parts: Vec<&str> = t.split('/').collect();
    if let [m, d, y] = parts[..] {
        if let (Ok(m), Ok(d), Ok(y)) = (m.parse::<u32>(), d.parse::<u32>(), y.parse::<u32>()) {
            let y = match y {
                0..=99 if parts[2].len() == 2 => 2000 + y,
                _ => y,
            };
            let candidate = format!("{m:02}/{d:02}/{y:04}");
            if parse_date(&candidate).is_ok() {
                return candidate;
            }
        }
    }
    t.to_string()
}

/// `$4,500` to `4500.00`; anything that is not a plain amount is returned
/// trimmed.
pub fn normalize_amount(text: &str) -> String {
    let t = text.trim();
    let digits: String = t.chars().filter(|c| !matches!(c, '$' | ',' | ' ')).collect();
    let (int, frac) = digits.split_once('.').unwrap_or((&digits, ""));
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || !all_digits(int) || !all_digits(frac) || frac.len() > 2 {
        return t.to_string();
    }
    let int = int.trim_start_matches('0');
    format!("{}.{:0<2}", if int.is_empty() { "0" } else { int }, frac)
}

fn normalize(format: Option<ValueFormat>, value: &str) -> String {
    match format {
        Some(ValueFormat::Date | ValueFormat::DatePeriod) => normalize_date(value),
        Some(ValueFormat::Amount) => normalize_amount(value),
        None => value.trim().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    pub id: String,
    pub category: String,
    pub complete: bool,
    pub orchestration_correct: bool,
    pub entities_correct: bool,
    pub success: bool,
    pub diagnostics: String,
}

impl CaseResult {
    fn new(case: &DatasetCase, orchestration: bool, entities: bool, diagnostics: String) -> Self {
        CaseResult {
            id: case.id.clone(),
            category: case.category.clone(),
            complete: case.complete,
            orchestration_correct: orchestration,
            entities_correct: entities,
            success: orchestration && entities,
            diagnostics,
        }
    }

    fn failed(case: &DatasetCase, diagnostics: String) -> Self {
        Self::new(case, false, false, diagnostics)
    }
}

struct Scorer<'a> {
    case: &'a DatasetCase,
    apis: Vec<&'a PlanStep>,
    get_info: Vec<&'a PlanStep>,
    bindings: &'a BindingEnv,
    catalog: &'a Catalog,
    domain: &'a Domain,
}

impl<'a> Scorer<'a> {
    /// Plan object that the action passes for `entity`: the parameter the
    /// action links to its output through the entity's goal predicate.
    fn object(&self, step: &'a PlanStep, entity: &str) -> Result<&'a str, String> {
        let slot = self
            .catalog
            .slots()
            .find(|s| s.predicate.predicate == entity)
            .ok_or_else(|| format!("entity `{entity}` is not in the catalog"))?;
        let schema = self.domain.action(&step.schema).ok_or_else(|| format!("unknown action `{}`", step.schema))?;
        let out = schema.output_index().ok_or_else(|| format!("`{}` has no output", schema.name))?;
        let out_name = &schema.parameters[out].name;
        schema
            .effect
            .iter()
            .filter(|l| l.positive && l.predicate == slot.predicate.pddl_predicate)
            .find_map(|l| match &l.args[..] {
                [Arg::Var(o), Arg::Var(p)] if o == out_name => {
                    schema.parameters.iter().position(|q| &q.name == p).and_then(|k| step.args.get(k))
                }
                _ => None,
            })
            .map(String::as_str)
            .ok_or_else(|| format!("`{}` takes no `{entity}`", step.schema))
    }

    fn output(step: &PlanStep) -> &str {
        step.args.last().map_or("", String::as_str)
    }

    /// First problem with the entities under `mapping` (gt call → index
    /// into `apis`), or `None` when all are right.
    fn entity_error(&self, mapping: &[usize]) -> Option<String> {
        for (ci, call) in self.case.gt_calls.iter().enumerate() {
            let step = self.apis[mapping[ci]];
            for e in &call.entities {
                let object = match self.object(step, &e.name) {
                    Ok(o) => o,
                    Err(msg) => return Some(msg),
                };
                let bound = self.bindings.get(object);
                match &e.value {
                    EntityValue::Missing => {
                        let slot = self.catalog.slots().find(|s| s.predicate.predicate == e.name)?;
                        let ty = &slot.arg.pddl_value_type;
                        if let Some(v) = bound {
                            return Some(format!("{}: expected MISSING, plan uses \"{v}\"", e.name));
                        }
                        let asks = self
                            .get_info
                            .iter()
                            .filter(|g| g.args.first().map(String::as_str) == Some(object))
                            .collect::<Vec<_>>();
                        if asks.len() != 1 || asks[0].args.get(1) != Some(ty) {
                            return Some(format!("{}: expected one {GET_INFO}({object}, {ty})", e.name));
                        }
                    }
                    EntityValue::Ref(r) => {
                        let producer = Self::output(self.apis[mapping[*r]]);
                        if object != producer || bound.is_some() {
                            return Some(format!("{}: expected output of call {r} ({producer}), got {object}", e.name));
                        }
                    }
                    EntityValue::Value(expected) => {
                        let slot = self.catalog.slots().find(|s| s.predicate.predicate == e.name)?;
                        let format = self.catalog.arg_type(&slot.arg.arg_type).and_then(|t| t.format);
                        match bound {
                            Some(v) if normalize(format, v) == normalize(format, expected) => {}
                            Some(v) => return Some(format!("{}: expected \"{expected}\", got \"{v}\"", e.name)),
                            None => return Some(format!("{}: expected \"{expected}\", plan has no value", e.name)),
                        }
                    }
                }
            }
        }
        let missing = self.case.entities().filter(|e| e.value == EntityValue::Missing).count();
        (self.get_info.len() != missing)
            .then(|| format!("{} {GET_INFO} step(s) for {missing} MISSING entit(ies)", self.get_info.len()))
    }

    fn dataflow_ok(&self, mapping: &[usize]) -> bool {
        self.case.gt_calls.iter().enumerate().all(|(ci, call)| {
            call.entities.iter().all(|e| match e.value {
                EntityValue::Ref(r) => {
                    self.object(self.apis[mapping[ci]], &e.name).is_ok_and(|o| o == Self::output(self.apis[mapping[r]]))
                }
                _ => true,
            })
        })
    }

    /// Calls `visit` with every injective, API-preserving mapping of gt
    /// calls to plan actions until it returns true.
    fn mappings(&self, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        fn go(
            s: &Scorer,
            mapping: &mut Vec<usize>,
            used: &mut Vec<bool>,
            visit: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            let i = mapping.len();
            if i == s.case.gt_calls.len() {
                return visit(mapping);
            }
            for (j, step) in s.apis.iter().enumerate() {
                if used[j] || step.schema != s.case.gt_calls[i].api {
                    continue;
                }
                used[j] = true;
                mapping.push(j);
                let found = go(s, mapping, used, visit);
                mapping.pop();
                used[j] = false;
                if found {
                    return true;
                }
            }
            false
        }
        go(self, &mut Vec::new(), &mut vec![false; self.apis.len()], visit)
    }
}

/// Scores one plan. Matching is insensitive to step order; only `REF`
/// edges tie particular plan actions together.
pub fn score(case: &DatasetCase, plan: &Plan, bindings: &BindingEnv, catalog: &Catalog, domain: &Domain) -> CaseResult {
    let (get_info, apis): (Vec<&PlanStep>, Vec<&PlanStep>) = plan.steps.iter().partition(|s| s.schema == GET_INFO);
    let scorer = Scorer { case, apis, get_info, bindings, catalog, domain };

    let mut expected: Vec<&str> = case.gt_calls.iter().map(|c| c.api.as_str()).collect();
    let mut actual: Vec<&str> = scorer.apis.iter().map(|s| s.schema.as_str()).collect();
    expected.sort_unstable();
    actual.sort_unstable();
    let mut diagnostics = Vec::new();
    let orchestration = if expected != actual {
        diagnostics.push(format!("APIs: expected [{}], plan has [{}]", expected.join(", "), actual.join(", ")));
        false
    } else if !scorer.mappings(&mut |m| scorer.dataflow_ok(m)) {
        diagnostics.push("dataflow edge not realized".to_string());
        false
    } else {
        true
    };

    let mut first_error = None;
    let entities = scorer.mappings(&mut |m| match scorer.entity_error(m) {
        None => true,
        Some(e) => {
            first_error.get_or_insert(e);
            false
        }
    });
    if !entities {
        diagnostics.push(first_error.unwrap_or_else(|| "no action for a ground-truth call".into()));
    }
    CaseResult::new(case, orchestration, entities, diagnostics.join("; "))
}

/// Runs the pipeline on one case and scores the outcome.
pub fn evaluate_case(case: &DatasetCase, pipeline: &Pipeline) -> CaseResult {
    match (pipeline.answer(&case.query), &case.expect_error) {
        (Err(PipelineError::Constraint(errors)), Some(expect)) if expect.matches(&errors) => {
            CaseResult::new(case, true, true, format!("expected error: {}", errors.join("; ")))
        }
        (Err(PipelineError::Constraint(errors)), _) => {
            CaseResult::failed(case, format!("constraint violation: {}", errors.join("; ")))
        }
        (Err(e), _) => CaseResult::failed(case, format!("{}: {e}", e.stage())),
        (Ok(_), _) if case.expects_error() => CaseResult::failed(case, "expected a domain-constraint error".into()),
        (Ok(a), _) => score(case, &a.plan, &a.bindings, &pipeline.catalog, &pipeline.domain),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub category: String,
    pub complete: bool,
    /// Cases per run.
    pub cases: usize,
    pub success_rate: f64,
    pub orchestration_rate: f64,
    pub entity_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Tally {
    cases: usize,
    success: usize,
    orchestration: usize,
    entities: usize,
}

impl Tally {
    fn add(&mut self, r: &CaseResult) {
        self.cases += 1;
        self.success += usize::from(r.success);
        self.orchestration += usize::from(r.orchestration_correct);
        self.entities += usize::from(r.entities_correct);
    }

    fn row(&self, category: &str, complete: bool, runs: usize) -> ReportRow {
        let rate = |n: usize| if self.cases == 0 { 0.0 } else { n as f64 / self.cases as f64 };
        ReportRow {
            category: category.to_string(),
            complete,
            cases: self.cases / runs.max(1),
            success_rate: rate(self.success),
            orchestration_rate: rate(self.orchestration),
            entity_rate: rate(self.entities),
        }
    }
}

type Metric = fn(&ReportRow) -> f64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub runs: usize,
    /// One row per (category, completeness) in dataset order.
    pub rows: Vec<ReportRow>,
    pub overall: ReportRow,
    /// Overall success rate of each run.
    pub run_success: Vec<f64>,
    /// Population variance of `run_success`.
    pub variance: f64,
    /// Failed case results of every run, with the run index.
    pub failures: Vec<(usize, CaseResult)>,
}

/// Evaluates every case `runs` times. Pipeline errors are scored as
/// failures; nothing aborts the run.
pub fn run_eval(dataset: &[DatasetCase], pipeline: &Pipeline, runs: usize) -> Report {
    let mut order: Vec<(String, bool)> = Vec::new();
    let mut tallies: BTreeMap<(String, bool), Tally> = BTreeMap::new();
    let mut overall = Tally::default();
    let mut run_success = Vec::new();
    let mut failures = Vec::new();
    for run in 0..runs {
        let mut this_run = Tally::default();
        for case in dataset {
            let result = evaluate_case(case, pipeline);
            let key = (case.category.clone(), case.complete);
            if !tallies.contains_key(&key) {
                order.push(key.clone());
            }
            tallies.entry(key).or_default().add(&result);
            overall.add(&result);
            this_run.add(&result);
            if !result.success {
                failures.push((run, result));
            }
        }
        run_success.push(this_run.row("", true, 1).success_rate);
    }
    let mean = run_success.iter().sum::<f64>() / run_success.len().max(1) as f64;
    let variance = run_success.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / run_success.len().max(1) as f64;
    Report {
        runs,
        rows: order.iter().map(|k| tallies[k].row(&k.0, k.1, runs)).collect(),
        overall: overall.row("overall", true, runs),
        run_success,
        variance,
        failures,
    }
}

impl Report {
    /// (complete cases, incomplete cases, total) for a category.
    pub fn category_counts(&self, category: &str) -> (usize, usize, usize) {
        let count = |complete: bool| {
            self.rows
                .iter()
                .filter(|r| r.category == category && r.complete == complete)
                .map(|r| r.cases)
                .sum::<usize>()
        };
        let (c, i) = (count(true), count(false));
        (c, i, c + i)
    }

    /// Tables of success, orchestration and entity rates by category, with
    /// complete and incomplete queries side by side.
    pub fn to_text(&self) -> String {
        let mut categories: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !categories.contains(&r.category.as_str()) {
                categories.push(&r.category);
            }
        }
        let width = categories.iter().map(|c| c.len()).max().unwrap_or(8).max(8);
        let mut out = String::new();
        let metrics: [(&str, Metric); 3] = [
            ("success", |r| r.success_rate),
            ("orchestration", |r| r.orchestration_rate),
            ("entity extraction", |r| r.entity_rate),
        ];
        for (title, metric) in metrics {
            let _ = writeln!(out, "{title} rate ({} run(s))", self.runs);
            let _ = writeln!(out, "{:<width$}  {:>14}  {:>14}", "category", "complete", "incomplete");
            for c in &categories {
                let cell = |complete: bool| {
                    self.rows
                        .iter()
                        .find(|r| r.category == *c && r.complete == complete)
                        .map(|r| format!("{:>3} {:>6.1}%", r.cases, 100.0 * metric(r)))
                        .unwrap_or_else(|| "-".to_string())
                };
                let _ = writeln!(out, "{c:<width$}  {:>14}  {:>14}", cell(true), cell(false));
            }
            let _ = writeln!(
                out,
                "{:<width$}  {:>14}\n",
                "overall",
                format!("{:>3} {:>6.1}%", self.overall.cases, 100.0 * metric(&self.overall))
            );
        }
        let _ = writeln!(out, "variance across runs: {}", self.variance);
        for (run, f) in &self.failures {
            let _ = writeln!(out, "FAIL run {run} {}: {}", f.id, f.diagnostics);
        }
        out
    }
}
