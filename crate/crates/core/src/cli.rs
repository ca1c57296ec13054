//! The `qaplan` command line.
//!
//! Exit codes: 0 success, 1 pipeline failure, 2 domain-constraint error,
//! 64 usage error, 65 malformed input, 66 missing input file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::asp::{parse_facts, render_facts, FactSet};
use crate::eval::{load_dataset, parse_dataset, run_eval, EvalError, BUNDLED_DATASET};
use crate::executor::{execute, render_plan, InfoSource};
use crate::pddl::{parse_task_checked, render_task, BindingEnv};
use crate::pipeline::{read_catalog, read_domain, read_rules, Pipeline, PipelineError, DEFAULT_PROBLEM_NAME};
use crate::planner::{CostTable, Strategy};
use crate::reasoner::extract_errors;
use crate::translator::{Backend, TranslateError, TranslatorConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONSTRAINT: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATAERR: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;

#[derive(Debug, Parser)]
#[command(name = "qaplan", version, about = "Answer queries by planning API orchestrations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TranslatorKind {
    Llm,
    Fixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    #[value(name = "greedy_hadd")]
    GreedyHadd,
    #[value(name = "astar_hadd")]
    AstarHadd,
    Bfs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Goal catalog (JSON); defaults to the bundled catalog.
    #[arg(long, global = true)]
    pub catalog: Option<PathBuf>,
    /// Domain rules; defaults to the bundled rules.
    #[arg(long, global = true)]
    pub rules: Option<PathBuf>,
    /// Domain PDDL; defaults to the bundled domain.
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "fixture")]
    pub translator: TranslatorKind,
    /// Fixture table (JSON); defaults to the bundled fixtures.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Base URL of an OpenAI-compatible API. The key is read from
    /// QAPLAN_LLM_API_KEY.
    #[arg(long, global = true)]
    pub llm_endpoint: Option<String>,
    #[arg(long, global = true)]
    pub llm_model: Option<String>,
    #[arg(long, global = true, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long, global = true, value_enum, default_value = "greedy_hadd")]
    pub strategy: StrategyArg,
    /// Search time limit in seconds.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub time_limit: f64,
    /// Per-action costs (JSON object of schema name to integer).
    #[arg(long, global = true)]
    pub costs: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FactsInput {
    /// Read facts from a file instead of translating a query.
    #[arg(long, conflicts_with = "query")]
    pub facts: Option<PathBuf>,
    pub query: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the intermediate representation of a query.
    Translate { query: String },
    /// Apply the domain rules and print the materialized representation.
    Materialize(FactsInput),
    /// Print the task PDDL for a query or a facts file.
    GenTask {
        #[command(flatten)]
        input: FactsInput,
        #[arg(long, default_value = DEFAULT_PROBLEM_NAME)]
        name: String,
        /// Also write the binding environment (JSON) here.
        #[arg(long)]
        bindings_out: Option<PathBuf>,
    },
    /// Plan a task PDDL file.
    Plan {
        task: PathBuf,
        /// Binding environment written by `gen-task --bindings-out`.
        #[arg(long)]
        bindings: Option<PathBuf>,
    },
    /// Translate, plan and render; optionally execute.
    Answer {
        query: String,
        /// Run the plan against stub APIs, asking for missing values.
        #[arg(long)]
        execute: bool,
        /// Answers for missing values (JSON object keyed by object or label)
        /// instead of prompting.
        #[arg(long, requires = "execute")]
        answers: Option<PathBuf>,
    },
    /// Score the pipeline on an annotated dataset.
    Eval {
        /// JSON-lines dataset; defaults to the bundled one.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

/// Failure with its exit code; the message goes to stderr.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Constraint(_) => CliError::new(EXIT_CONSTRAINT, e.to_string()),
            PipelineError::Translate(TranslateError::EmptyQuery) => CliError::new(EXIT_USAGE, "query is empty"),
            PipelineError::Translate(TranslateError::Config(m)) => CliError::new(EXIT_USAGE, m),
            PipelineError::Translate(TranslateError::Fixtures(m)) => CliError::new(EXIT_DATAERR, m),
            other => CliError::new(EXIT_FAILURE, other.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == std::io::ErrorKind::NotFound { EXIT_NOINPUT } else { EXIT_DATAERR };
        CliError::new(code, format!("{}: {e}", path.display()))
    })
}

/// Missing files exit 66, unparsable ones 65.
fn load<T>(path: &Path, parse: impl Fn(&Path) -> Result<T, String>) -> Result<T, CliError> {
    read_input(path)?;
    parse(path).map_err(|m| CliError::new(EXIT_DATAERR, m))
}

fn build_pipeline(g: &GlobalArgs) -> Result<Pipeline, CliError> {
    let mut p = Pipeline::bundled();
    if let Some(path) = &g.catalog {
        p.catalog = load(path, read_catalog)?;
    }
    if let Some(path) = &g.rules {
        p.rules = load(path, |f| read_rules(f, &p.builtins))?;
    }
    if let Some(path) = &g.domain {
        p.domain = load(path, read_domain)?;
    }
    if let Some(path) = &g.costs {
        let text = read_input(path)?;
        p.grounding.costs =
            CostTable::from_json(&text).map_err(|e| CliError::new(EXIT_DATAERR, format!("{}: {e}", path.display())))?;
    }
    if !(g.time_limit.is_finite() && g.time_limit > 0.0) {
        return Err(CliError::new(EXIT_USAGE, "--time-limit must be positive"));
    }
    p.planner.time_limit = Duration::from_secs_f64(g.time_limit);
    p.planner.strategy = match g.strategy {
        StrategyArg::GreedyHadd => Strategy::GreedyHadd,
        StrategyArg::AstarHadd => Strategy::AstarHadd,
        StrategyArg::Bfs => Strategy::Bfs,
    };
    if let Some(path) = &g.fixtures {
        read_input(path)?;
    }
    let config = TranslatorConfig {
        backend: match g.translator {
            TranslatorKind::Llm => Backend::Llm,
            TranslatorKind::Fixture => Backend::Fixture,
        },
        endpoint: g.llm_endpoint.clone(),
        model: g.llm_model.clone(),
        temperature: g.temperature,
        fixtures_path: g.fixtures.clone(),
        ..TranslatorConfig::default()
    };
    p.with_translator(&config).map_err(|e| CliError::from(PipelineError::Translate(e)))
}

fn facts_for(p: &Pipeline, input: &FactsInput) -> Result<FactSet, CliError> {
    match (&input.facts, &input.query) {
        (Some(path), _) => {
            let text = read_input(path)?;
            parse_facts(&text).map_err(|e| CliError::new(EXIT_DATAERR, format!("{}: {e}", path.display())))
        }
        (None, Some(q)) => Ok(p.translate(q)?.facts),
        (None, None) => Err(CliError::new(EXIT_USAGE, "give a query or --facts <file>")),
    }
}

fn json_line(out: &mut dyn Write, value: &serde_json::Value) -> std::io::Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json values serialize"))
}

fn run_command(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let p = build_pipeline(&cli.global)?;
    let json = cli.global.format == Format::Json;
    let io = |e: std::io::Error| CliError::new(EXIT_FAILURE, format!("output: {e}"));
    match &cli.command {
        Command::Translate { query } => {
            let t = p.translate(query)?;
            if json {
                json_line(
                    out,
                    &json!({ "facts": render_facts(&t.facts), "attempts": t.attempts, "raw_response": t.raw_response }),
                )
            } else {
                write!(out, "{}", render_facts(&t.facts))
            }
            .map_err(io)
        }
        Command::Materialize(input) => {
            let m = p.materialize(&facts_for(&p, input)?)?;
            if json {
                json_line(out, &json!({ "facts": render_facts(&m), "errors": extract_errors(&m) }))
            } else {
                write!(out, "{}", render_facts(&m))
            }
            .map_err(io)
        }
        Command::GenTask { input, name, bindings_out } => {
            let facts = facts_for(&p, input)?;
            let m = p.materialize(&facts)?;
            let errors = extract_errors(&m);
            if !errors.is_empty() {
                return Err(PipelineError::Constraint(errors).into());
            }
            let (task, bindings) = crate::pddl::generate_task(&m, &p.catalog, name).map_err(PipelineError::from)?;
            if let Some(path) = bindings_out {
                let text = serde_json::to_string_pretty(&bindings).expect("bindings serialize");
                std::fs::write(path, text + "\n")
                    .map_err(|e| CliError::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
            }
            if json {
                json_line(out, &json!({ "task": render_task(&task), "bindings": bindings }))
            } else {
                write!(out, "{}", render_task(&task))
            }
            .map_err(io)
        }
        Command::Plan { task, bindings } => {
            let text = read_input(task)?;
            let task = parse_task_checked(&text, &p.domain)
                .map_err(|e| CliError::new(EXIT_DATAERR, format!("{}: {e}", task.display())))?;
            let bindings: BindingEnv = match bindings {
                Some(path) => serde_json::from_str(&read_input(path)?)
                    .map_err(|e| CliError::new(EXIT_DATAERR, format!("{}: {e}", path.display())))?,
                None => BindingEnv::new(),
            };
            let plan = p.plan(&task)?;
            if json {
                json_line(out, &json!({ "plan": plan, "cost": plan.cost() }))
            } else {
                write!(out, "{}", render_plan(&plan, &bindings, &p.catalog))
            }
            .map_err(io)
        }
        Command::Answer { query, execute: run, answers } => {
            if query.trim().is_empty() {
                return Err(CliError::new(EXIT_USAGE, "query is empty"));
            }
            let a = p.answer(query)?;
            let trace = if *run && !a.how_to_only {
                let mut source = match answers {
                    Some(path) => InfoSource::AnswerMap(
                        serde_json::from_str::<BTreeMap<String, String>>(&read_input(path)?)
                            .map_err(|e| CliError::new(EXIT_DATAERR, format!("{}: {e}", path.display())))?,
                    ),
                    None => InfoSource::Interactive { input: stdin, output: out },
                };
                Some(execute(&a.plan, &a.bindings, &p.catalog, &mut source))
            } else {
                None
            };
            if json {
                json_line(out, &json!({ "answer": a, "trace": trace })).map_err(io)?;
            } else {
                write!(out, "{}", a.rendered).map_err(io)?;
                if let Some(t) = &trace {
                    for r in &t.records {
                        let inputs: Vec<String> = r.inputs.iter().map(|(o, v)| format!("{o}={v}")).collect();
                        writeln!(out, "[{}] {} {} -> {} = {}", r.step, r.action, inputs.join(", "), r.output, r.value)
                            .map_err(io)?;
                    }
                    match &t.status {
                        crate::executor::ExecStatus::Completed => writeln!(out, "completed").map_err(io)?,
                        crate::executor::ExecStatus::Aborted { step, reason } => {
                            writeln!(out, "aborted at step {step}: {reason}").map_err(io)?
                        }
                    }
                }
            }
            match &trace {
                Some(t) if !t.completed() => Err(CliError::new(EXIT_FAILURE, "execution aborted")),
                _ => Ok(()),
            }
        }
        Command::Eval { dataset, runs } => {
            if *runs == 0 {
                return Err(CliError::new(EXIT_USAGE, "--runs must be at least 1"));
            }
            let cases = match dataset {
                Some(path) => load_dataset(path),
                None => parse_dataset(BUNDLED_DATASET),
            }
            .map_err(|e| match e {
                EvalError::Io { not_found: true, .. } => CliError::new(EXIT_NOINPUT, e.to_string()),
                other => CliError::new(EXIT_DATAERR, other.to_string()),
            })?;
            let report = run_eval(&cases, &p, *runs);
            if json {
                json_line(out, &serde_json::to_value(&report).expect("report serializes"))
            } else {
                write!(out, "{}", report.to_text())
            }
            .map_err(io)
        }
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run_command(&cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "qaplan: {}", e.message);
            e.code
        }
    }
}
