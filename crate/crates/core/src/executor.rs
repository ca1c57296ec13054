//! Plan rendering in step syntax and execution against stub APIs.
//!
//! Rendering and execution walk the same sequence of steps: `get_info_api`
//! actions in plan order, then every value known up front (the binding
//! environment) right before the first API call that needs inputs, then the
//! remaining API calls. For API actions the last argument is the produced
//! object and the others are inputs; `get_info_api(obj, type)` produces
//! `obj`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde::Serialize;

use crate::catalog::Catalog;
use crate::pddl::BindingEnv;
use crate::planner::{Plan, PlanStep, GET_INFO};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Step<'a> {
    Bind { object: &'a str, value: &'a str },
    GetInfo { object: &'a str, ty: &'a str },
    Api { schema: &'a str, inputs: &'a [String], output: &'a str },
}

fn steps<'a>(plan: &'a Plan, bindings: &'a BindingEnv) -> Vec<Step<'a>> {
    let mut first_use: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, s) in plan.steps.iter().enumerate().filter(|(_, s)| s.schema != GET_INFO) {
        for (pos, arg) in inputs(s).iter().enumerate() {
            first_use.entry(arg.as_str()).or_insert((i, pos));
        }
    }
    let mut bound: Vec<(&str, &str)> = bindings.iter().collect();
    bound.sort_by_key(|(object, _)| (first_use.get(object).copied().unwrap_or((usize::MAX, 0)), *object));
    let mut pending = Some(bound);

    let mut out = Vec::new();
    for s in &plan.steps {
        if s.schema == GET_INFO {
            out.push(Step::GetInfo {
                object: s.args.first().map_or("", String::as_str),
                ty: s.args.get(1).map_or("", String::as_str),
            });
            continue;
        }
        if let Some(bound) = pending.take() {
            out.extend(bound.into_iter().map(|(object, value)| Step::Bind { object, value }));
        }
        out.push(Step::Api { schema: &s.schema, inputs: inputs(s), output: s.args.last().map_or("", String::as_str) });
    }
    if let Some(bound) = pending {
        out.extend(bound.into_iter().map(|(object, value)| Step::Bind { object, value }));
    }
    out
}

fn inputs(step: &PlanStep) -> &[String] {
    &step.args[..step.args.len().saturating_sub(1)]
}

/// Renders `Step N. ...;` lines, one per step, each ending in a newline.
pub fn render_plan(plan: &Plan, bindings: &BindingEnv, catalog: &Catalog) -> String {
    let mut out = String::new();
    for (i, step) in steps(plan, bindings).into_iter().enumerate() {
        let n = i + 1;
        let _ = match step {
            Step::Bind { object, value } => writeln!(out, "Step {n}. {object} = \"{value}\";"),
            Step::GetInfo { object, ty } => {
                writeln!(out, "Step {n}. {object} = {GET_INFO}(\"{}\", {ty});", catalog.label_for_object(object))
            }
            Step::Api { schema, inputs, output } => {
                writeln!(out, "Step {n}. {output} = {schema}({});", inputs.join(", "))
            }
        };
    }
    out
}

/// True when every API call in the plan answers a how-to question; such
/// plans are shown, not executed.
pub fn is_how_to_only(plan: &Plan) -> bool {
    let mut apis = plan.steps.iter().filter(|s| s.schema != GET_INFO).peekable();
    apis.peek().is_some() && apis.all(|s| s.schema == "help_api")
}

/// Where values for `get_info_api` steps come from.
pub enum InfoSource<'a> {
    /// Prompts `? <label> (<type>): ` and reads one line per question. An
    /// empty line or end of input aborts.
    Interactive { input: &'a mut dyn BufRead, output: &'a mut dyn Write },
    /// Answers keyed by object name (`x_start_date`) or label (`start date`).
    AnswerMap(BTreeMap<String, String>),
}

impl InfoSource<'_> {
    fn ask(&mut self, object: &str, label: &str, ty: &str) -> Result<String, AbortReason> {
        match self {
            InfoSource::AnswerMap(answers) => answers
                .get(object)
                .or_else(|| answers.get(label))
                .cloned()
                .ok_or_else(|| AbortReason::MissingAnswer { object: object.to_string(), label: label.to_string() }),
            InfoSource::Interactive { input, output } => {
                let io_err = |e: io::Error| AbortReason::Io(e.to_string());
                write!(output, "? {label} ({ty}): ").map_err(io_err)?;
                output.flush().map_err(io_err)?;
                let mut line = String::new();
                input.read_line(&mut line).map_err(io_err)?;
                let answer = line.trim();
                if answer.is_empty() {
                    Err(AbortReason::UserAbort)
                } else {
                    Ok(answer.to_string())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Binding,
    GetInfo,
    Api,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecRecord {
    /// 1-based, matching the rendered step numbers.
    pub step: usize,
    pub kind: RecordKind,
    pub action: String,
    /// Input objects with the values they held when the step ran.
    pub inputs: Vec<(String, String)>,
    pub output: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum AbortReason {
    MissingAnswer { object: String, label: String },
    UserAbort,
    UnresolvedInput { object: String },
    Io(String),
}

impl std::fmt::Display for AbortReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbortReason::MissingAnswer { object, label } => write!(f, "no answer for `{object}` ({label})"),
            AbortReason::UserAbort => f.write_str("aborted by user"),
            AbortReason::UnresolvedInput { object } => write!(f, "input `{object}` has no value"),
            AbortReason::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExecStatus {
    Completed,
    Aborted { step: usize, reason: AbortReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionTrace {
    pub records: Vec<ExecRecord>,
    pub status: ExecStatus,
}

impl ExecutionTrace {
    pub fn completed(&self) -> bool {
        self.status == ExecStatus::Completed
    }
}

/// Runs the plan step by step. Stub APIs produce the token `<api>#<step>`.
pub fn execute(plan: &Plan, bindings: &BindingEnv, catalog: &Catalog, info: &mut InfoSource<'_>) -> ExecutionTrace {
    let mut live: BTreeMap<String, String> = BTreeMap::new();
    let mut records = Vec::new();
    for (i, step) in steps(plan, bindings).into_iter().enumerate() {
        let n = i + 1;
        let abort = |records, reason| ExecutionTrace { records, status: ExecStatus::Aborted { step: n, reason } };
        let record = match step {
            Step::Bind { object, value } => ExecRecord {
                step: n,
                kind: RecordKind::Binding,
                action: "bind".into(),
                inputs: vec![],
                output: object.into(),
                value: value.into(),
            },
            Step::GetInfo { object, ty } => match info.ask(object, &catalog.label_for_object(object), ty) {
                Ok(value) => ExecRecord {
                    step: n,
                    kind: RecordKind::GetInfo,
                    action: GET_INFO.into(),
                    inputs: vec![],
                    output: object.into(),
                    value,
                },
                Err(reason) => return abort(records, reason),
            },
            Step::Api { schema, inputs, output } => {
                let mut resolved = Vec::with_capacity(inputs.len());
                for input in inputs {
                    match live.get(input) {
                        Some(v) => resolved.push((input.clone(), v.clone())),
                        None => return abort(records, AbortReason::UnresolvedInput { object: input.clone() }),
                    }
                }
                ExecRecord {
                    step: n,
                    kind: RecordKind::Api,
                    action: schema.into(),
                    inputs: resolved,
                    output: output.into(),
                    value: format!("{schema}#{n}"),
                }
            }
        };
        live.insert(record.output.clone(), record.value.clone());
        records.push(record);
    }
    ExecutionTrace { records, status: ExecStatus::Completed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(schema: &str, args: &[&str]) -> PlanStep {
        PlanStep { schema: schema.into(), args: args.iter().map(|s| s.to_string()).collect(), cost: 1 }
    }

    fn chat_plan() -> (Plan, BindingEnv) {
        let plan = Plan {
            steps: vec![
                step("get_info_api", &["x_contact_topic", "contact_topic"]),
                step("contact_us_api", &["x_contact_topic", "x_contact_channel", "x"]),
            ],
        };
        (plan, [("x_contact_channel", "chat")].into_iter().collect())
    }

    #[test]
    fn renders_expense_listing() {
        let plan = Plan { steps: vec![step("expense_spend_api", &["x_start_date", "x_end_date", "x"])] };
        let env: BindingEnv = [("x_start_date", "01/01/2023"), ("x_end_date", "03/31/2023")].into_iter().collect();
        assert_eq!(
            render_plan(&plan, &env, &Catalog::bundled()),
            "Step 1. x_start_date = \"01/01/2023\";\n\
             Step 2. x_end_date = \"03/31/2023\";\n\
             Step 3. x = expense_spend_api(x_start_date, x_end_date);\n"
        );
    }

    #[test]
    fn renders_get_info_labels() {
        let (plan, env) = chat_plan();
        assert_eq!(
            render_plan(&plan, &env, &Catalog::bundled()),
            "Step 1. x_contact_topic = get_info_api(\"contact topic\", contact_topic);\n\
             Step 2. x_contact_channel = \"chat\";\n\
             Step 3. x = contact_us_api(x_contact_topic, x_contact_channel);\n"
        );
        assert_eq!(render_plan(&Plan::default(), &BindingEnv::new(), &Catalog::bundled()), "");
    }

    #[test]
    fn executes_with_answer_map() {
        let (plan, env) = chat_plan();
        let catalog = Catalog::bundled();
        let mut info = InfoSource::AnswerMap([("x_contact_topic".to_string(), "Billing".to_string())].into());
        let trace = execute(&plan, &env, &catalog, &mut info);
        assert!(trace.completed());
        assert_eq!(trace.records.len(), 3);
        assert_eq!(
            trace.records[2].inputs,
            [("x_contact_topic".to_string(), "Billing".to_string()), ("x_contact_channel".into(), "chat".into())]
        );
        assert_eq!(trace.records[2].value, "contact_us_api#3");

        let mut by_label = InfoSource::AnswerMap([("contact topic".to_string(), "Taxes".to_string())].into());
        assert!(execute(&plan, &env, &catalog, &mut by_label).completed());

        let mut empty = InfoSource::AnswerMap(BTreeMap::new());
        let trace = execute(&plan, &env, &catalog, &mut empty);
        assert!(trace.records.is_empty());
        assert!(matches!(trace.status, ExecStatus::Aborted { step: 1, reason: AbortReason::MissingAnswer { .. } }));
    }

    #[test]
    fn interactive_prompts() {
        let (plan, env) = chat_plan();
        let mut input = io::Cursor::new(b"Payroll\n".to_vec());
        let mut output = Vec::new();
        let trace = execute(
            &plan,
            &env,
            &Catalog::bundled(),
            &mut InfoSource::Interactive { input: &mut input, output: &mut output },
        );
        assert!(trace.completed());
        assert_eq!(String::from_utf8(output).unwrap(), "? contact topic (contact_topic): ");
        assert_eq!(trace.records[0].value, "Payroll");

        let mut eof = io::Cursor::new(Vec::new());
        let mut sink = Vec::new();
        let trace = execute(
            &plan,
            &env,
            &Catalog::bundled(),
            &mut InfoSource::Interactive { input: &mut eof, output: &mut sink },
        );
        assert_eq!(trace.status, ExecStatus::Aborted { step: 1, reason: AbortReason::UserAbort });
    }

    #[test]
    fn dataflow_token_is_consumed() {
        let plan = Plan {
            steps: vec![
                step("profit_loss_api", &["x_start_date", "x_end_date", "x"]),
                step("contact_us_api", &["x", "y_contact_channel", "y"]),
            ],
        };
        let env: BindingEnv =
            [("x_start_date", "07/01/2024"), ("x_end_date", "09/30/2024"), ("y_contact_channel", "phone")]
                .into_iter()
                .collect();
        let catalog = Catalog::bundled();
        assert_eq!(
            render_plan(&plan, &env, &catalog),
            "Step 1. x_start_date = \"07/01/2024\";\n\
             Step 2. x_end_date = \"09/30/2024\";\n\
             Step 3. y_contact_channel = \"phone\";\n\
             Step 4. x = profit_loss_api(x_start_date, x_end_date);\n\
             Step 5. y = contact_us_api(x, y_contact_channel);\n"
        );
        let trace = execute(&plan, &env, &catalog, &mut InfoSource::AnswerMap(BTreeMap::new()));
        assert!(trace.completed());
        assert_eq!(trace.records[3].value, "profit_loss_api#4");
        assert_eq!(trace.records[4].inputs[0], ("x".to_string(), "profit_loss_api#4".to_string()));
    }

    #[test]
    fn how_to_detection() {
        assert!(is_how_to_only(&Plan { steps: vec![step("help_api", &["x_help_topic", "x"])] }));
        assert!(!is_how_to_only(&Plan::default()));
        let (plan, _) = chat_plan();
        assert!(!is_how_to_only(&plan));
    }
}
