//! End-to-end query answering: translate → materialize → check errors →
//! generate task → ground and solve → render.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::asp::{render_facts, FactSet};
use crate::catalog::{load_catalog, Catalog};
use crate::executor::{is_how_to_only, render_plan};
use crate::pddl::{generate_task, parse_domain, render_task, BindingEnv, Domain, TaskError, TaskProblem};
use crate::planner::{ground_with, solve, GroundOptions, Plan, PlanError, PlannerConfig};
use crate::reasoner::{extract_errors, materialize, parse_rules_with, BuiltinRegistry, ReasonerError, Rule};
use crate::translator::{FixtureTranslator, TranslateError, TranslationResult, Translator, TranslatorConfig};

/// The domain rules shipped with the crate.
pub const BUNDLED_RULES: &str = include_str!("../data/rules.lp");

/// Problem name given to generated tasks.
pub const DEFAULT_PROBLEM_NAME: &str = "query";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("translate: {0}")]
    Translate(#[from] TranslateError),
    #[error("materialize: {0}")]
    Reasoner(#[from] ReasonerError),
    /// The materialized representation contains `error` atoms; the
    /// messages are meant for the user.
    #[error("{}", .0.join("\n"))]
    Constraint(Vec<String>),
    #[error("gen-task: {0}")]
    Task(TaskError),
    #[error("plan: {0}")]
    Plan(#[from] PlanError),
}

impl From<TaskError> for PipelineError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::ConstraintViolation(errors) => PipelineError::Constraint(errors),
            other => PipelineError::Task(other),
        }
    }
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Translate(_) => "translate",
            PipelineError::Reasoner(_) => "materialize",
            PipelineError::Constraint(_) => "constraint",
            PipelineError::Task(_) => "gen-task",
            PipelineError::Plan(_) => "plan",
        }
    }
}

/// Everything produced while answering one query.
#[derive(Debug, Clone, Serialize)]
pub struct Answer {
    pub query: String,
    #[serde(serialize_with = "as_facts")]
    pub intermediate: FactSet,
    pub attempts: u32,
    #[serde(serialize_with = "as_facts")]
    pub materialized: FactSet,
    #[serde(serialize_with = "as_task")]
    pub task: TaskProblem,
    pub bindings: BindingEnv,
    pub plan: Plan,
    pub rendered: String,
    /// How-to plans are shown to the user but never executed.
    pub how_to_only: bool,
}

fn as_facts<S: serde::Serializer>(facts: &FactSet, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_facts(facts))
}

fn as_task<S: serde::Serializer>(task: &TaskProblem, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&render_task(task))
}

/// The non-translation part of an [`Answer`].
#[derive(Debug, Clone)]
pub struct Compiled {
    pub materialized: FactSet,
    pub task: TaskProblem,
    pub bindings: BindingEnv,
    pub plan: Plan,
}

pub struct Pipeline {
    pub catalog: Catalog,
    pub rules: Vec<Rule>,
    pub builtins: BuiltinRegistry,
    pub domain: Domain,
    pub translator: Box<dyn Translator>,
    pub planner: PlannerConfig,
    pub grounding: GroundOptions,
}

impl Pipeline {
    /// Bundled catalog, rules and domain with the bundled fixture translator.
    pub fn bundled() -> Pipeline {
        let builtins = BuiltinRegistry::default();
        Pipeline {
            catalog: Catalog::bundled(),
            rules: parse_rules_with(BUNDLED_RULES, &builtins).expect("bundled rules parse"),
            builtins,
            domain: Domain::bundled(),
            translator: Box::new(FixtureTranslator::bundled()),
            planner: PlannerConfig::default(),
            grounding: GroundOptions::default(),
        }
    }

    pub fn with_translator(mut self, config: &TranslatorConfig) -> Result<Pipeline, TranslateError> {
        self.translator = config.build()?;
        Ok(self)
    }

    pub fn translate(&self, query: &str) -> Result<TranslationResult, PipelineError> {
        Ok(self.translator.translate(query, &self.catalog)?)
    }

    /// Least model of the domain rules over `facts`, error atoms included.
    pub fn materialize(&self, facts: &FactSet) -> Result<FactSet, PipelineError> {
        Ok(materialize(facts, &self.rules, &self.builtins)?)
    }

    /// Materializes, stops on error atoms, then generates and solves the task.
    pub fn compile(&self, intermediate: &FactSet, problem_name: &str) -> Result<Compiled, PipelineError> {
        let materialized = self.materialize(intermediate)?;
        let errors = extract_errors(&materialized);
        if !errors.is_empty() {
            return Err(PipelineError::Constraint(errors));
        }
        let (task, bindings) = generate_task(&materialized, &self.catalog, problem_name)?;
        let plan = self.plan(&task)?;
        Ok(Compiled { materialized, task, bindings, plan })
    }

    pub fn plan(&self, task: &TaskProblem) -> Result<Plan, PipelineError> {
        let problem = ground_with(&self.domain, task, &self.grounding)?;
        Ok(solve(&problem, &self.planner)?)
    }

    pub fn answer(&self, query: &str) -> Result<Answer, PipelineError> {
        let translation = self.translate(query)?;
        let compiled = self.compile(&translation.facts, DEFAULT_PROBLEM_NAME)?;
        let rendered = render_plan(&compiled.plan, &compiled.bindings, &self.catalog);
        Ok(Answer {
            query: query.to_string(),
            intermediate: translation.facts,
            attempts: translation.attempts,
            how_to_only: is_how_to_only(&compiled.plan),
            materialized: compiled.materialized,
            task: compiled.task,
            bindings: compiled.bindings,
            plan: compiled.plan,
            rendered,
        })
    }
}

/// Loads a catalog file.
pub fn read_catalog(path: &Path) -> Result<Catalog, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load_catalog(&text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads a rules file against the default builtins.
pub fn read_rules(path: &Path, builtins: &BuiltinRegistry) -> Result<Vec<Rule>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_rules_with(&text, builtins).map_err(|e| format!("{}: {e}", path.display()))
}

/// Loads a domain file.
pub fn read_domain(path: &Path) -> Result<Domain, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_domain(&text).map_err(|e| format!("{}: {e}", path.display()))
}
