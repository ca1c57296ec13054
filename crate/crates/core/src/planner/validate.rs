use std::fmt;

use thiserror::Error;

use super::{GroundProblem, Plan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidReason {
    UnknownAction(String),
    PreconditionFalse { action: String, atom: String },
    ForbiddenAtomTrue { action: String, atom: String },
    GoalNotReached(Vec<String>),
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::UnknownAction(a) => write!(f, "`{a}` is not an action of this problem"),
            InvalidReason::PreconditionFalse { action, atom } => write!(f, "{action} requires {atom}"),
            InvalidReason::ForbiddenAtomTrue { action, atom } => write!(f, "{action} requires (not {atom})"),
            InvalidReason::GoalNotReached(atoms) => write!(f, "goal not reached: {}", atoms.join(" ")),
        }
    }
}

/// Why a plan is invalid. `step` is 1-based; `None` when every step applies
/// but the final state misses part of the goal.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}{reason}", step.map(|s| format!("step {s}: ")).unwrap_or_default())]
pub struct InvalidPlan {
    pub step: Option<usize>,
    pub reason: InvalidReason,
}

/// Simulates `plan` from the initial state.
pub fn validate(problem: &GroundProblem, plan: &Plan) -> Result<(), InvalidPlan> {
    let mut state = problem.init.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        let fail = |reason| InvalidPlan { step: Some(i + 1), reason };
        let action = problem
            .action_for(&step.schema, &step.args)
            .ok_or_else(|| fail(InvalidReason::UnknownAction(step.to_string())))?;
        if let Some(&a) = action.pre_pos.iter().find(|&&a| !state.contains(a)) {
            return Err(fail(InvalidReason::PreconditionFalse {
                action: action.to_string(),
                atom: problem.atoms[a].to_string(),
            }));
        }
        if let Some(&a) = action.pre_neg.iter().find(|&&a| state.contains(a)) {
            return Err(fail(InvalidReason::ForbiddenAtomTrue {
                action: action.to_string(),
                atom: problem.atoms[a].to_string(),
            }));
        }
        state = action.apply(&state);
    }
    let missing: Vec<String> =
        problem.goal.iter().filter(|&&g| !state.contains(g)).map(|&g| problem.atoms[g].to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(InvalidPlan { step: None, reason: InvalidReason::GoalNotReached(missing) })
    }
}
