//! Grounding of a typed-STRIPS domain and task into a propositional problem,
//! heuristic forward search, a breadth-first oracle, and a plan validator.

mod ground;
mod search;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pddl::GroundAtom;

pub use ground::{ground, ground_with, GroundOptions};
pub use search::{bfs_solve, hadd, solve};
pub use validate::{validate, InvalidPlan, InvalidReason};

/// Name of the information-gathering action.
pub const GET_INFO: &str = "get_info_api";

pub type State = FixedBitSet;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("no plan exists ({expanded} states expanded)")]
    Unsolvable { expanded: usize },
    #[error("search time limit of {limit:?} exceeded ({expanded} states expanded, {generated} generated)")]
    Timeout { limit: Duration, expanded: usize, generated: usize },
    #[error("node limit of {limit} exceeded")]
    LimitExceeded { limit: usize },
    #[error("task is for domain `{task}`, not `{domain}`")]
    DomainMismatch { task: String, domain: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
    pub cost: u32,
}

impl GroundAction {
    pub fn applicable(&self, state: &State) -> bool {
        self.pre_pos.iter().all(|&a| state.contains(a)) && !self.pre_neg.iter().any(|&a| state.contains(a))
    }

    /// Delete-then-add successor.
    pub fn apply(&self, state: &State) -> State {
        let mut next = state.clone();
        for &a in &self.del {
            next.set(a, false);
        }
        for &a in &self.add {
            next.insert(a);
        }
        next
    }

    pub fn step(&self) -> PlanStep {
        PlanStep { schema: self.schema.clone(), args: self.args.clone(), cost: self.cost }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.schema, self.args.join(", "))
    }
}

#[derive(Debug, Clone)]
pub struct GroundProblem {
    pub atoms: Vec<GroundAtom>,
    pub init: State,
    pub goal: Vec<usize>,
    /// In canonical order: schema name, then argument positions in the
    /// task's object list.
    pub actions: Vec<GroundAction>,
    index: HashMap<GroundAtom, usize>,
    by_step: HashMap<(String, Vec<String>), usize>,
}

impl GroundProblem {
    pub fn atom_id(&self, atom: &GroundAtom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    /// The ground action a plan step refers to.
    pub fn action_for(&self, schema: &str, args: &[String]) -> Option<&GroundAction> {
        self.by_step.get(&(schema.to_string(), args.to_vec())).map(|&i| &self.actions[i])
    }

    pub fn is_goal(&self, state: &State) -> bool {
        self.goal.iter().all(|&g| state.contains(g))
    }

    pub fn atoms_in(&self, state: &State) -> Vec<&GroundAtom> {
        state.ones().map(|i| &self.atoms[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanStep {
    pub schema: String,
    pub args: Vec<String>,
    pub cost: u32,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.schema, self.args.join(", "))
    }
}

/// A sequence of ground actions; serializes as a JSON list of
/// `{schema, args, cost}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn cost(&self) -> u64 {
        self.steps.iter().map(|s| u64::from(s.cost)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    GreedyHadd,
    AstarHadd,
    Bfs,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy_hadd" => Ok(Strategy::GreedyHadd),
            "astar_hadd" => Ok(Strategy::AstarHadd),
            "bfs" => Ok(Strategy::Bfs),
            other => Err(format!("unknown strategy `{other}` (expected greedy_hadd, astar_hadd or bfs)")),
        }
    }
}

/// Per-schema action costs; schemas not listed cost 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostTable(pub BTreeMap<String, u32>);

impl CostTable {
    pub fn cost(&self, schema: &str) -> u32 {
        self.0.get(schema).copied().unwrap_or(1)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub strategy: Strategy,
    pub time_limit: Duration,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { strategy: Strategy::GreedyHadd, time_limit: Duration::from_secs(1) }
    }
}
