use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;

use super::{CostTable, GroundAction, GroundProblem, PlanError};
use crate::pddl::{ActionSchema, Arg, Domain, GroundAtom, Literal, TaskProblem};

#[derive(Debug, Clone)]
pub struct GroundOptions {
    /// Drop actions that cannot contribute to the goal (backward
    /// relevance over add effects, and over delete effects for atoms that
    /// relevant actions need to be false).
    pub relevance_pruning: bool,
    pub costs: CostTable,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { relevance_pruning: true, costs: CostTable::default() }
    }
}

pub fn ground(domain: &Domain, task: &TaskProblem) -> Result<GroundProblem, PlanError> {
    ground_with(domain, task, &GroundOptions::default())
}

/// Instantiates every action schema over the task's objects.
///
/// Predicates that no action changes (`has_type`) are static: assignments
/// that violate a static precondition are discarded during enumeration and
/// static literals are dropped from the remaining actions.
pub fn ground_with(domain: &Domain, task: &TaskProblem, options: &GroundOptions) -> Result<GroundProblem, PlanError> {
    if task.domain_name != domain.name {
        return Err(PlanError::DomainMismatch { task: task.domain_name.clone(), domain: domain.name.clone() });
    }
    let fluent: HashSet<&str> =
        domain.actions.iter().flat_map(|a| a.effect.iter().map(|l| l.predicate.as_str())).collect();
    let init_set: HashSet<&GroundAtom> = task.init.iter().collect();
    let position: HashMap<&str, usize> = task.objects.iter().enumerate().map(|(i, o)| (o.name.as_str(), i)).collect();

    let mut interner = Interner::default();
    for a in task.init.iter().chain(&task.goal) {
        interner.id(a);
    }

    let mut actions = Vec::new();
    for schema in &domain.actions {
        let candidates: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| task.objects.iter().filter(|o| domain.is_subtype(&o.ty, &p.ty)).map(|o| o.name.as_str()).collect())
            .collect();
        let params: HashMap<&str, usize> =
            schema.parameters.iter().enumerate().map(|(i, p)| (p.name.as_str(), i)).collect();
        // Static literals checked as soon as their last parameter is bound.
        let mut checks: Vec<Vec<&Literal>> = vec![Vec::new(); schema.parameters.len()];
        let mut constant_checks = Vec::new();
        for lit in schema.precondition.iter().filter(|l| !fluent.contains(l.predicate.as_str())) {
            let last = lit
                .args
                .iter()
                .filter_map(|a| match a {
                    Arg::Var(v) => params.get(v.as_str()).copied(),
                    Arg::Const(_) => None,
                })
                .max();
            match last {
                Some(i) => checks[i].push(lit),
                None => constant_checks.push(lit),
            }
        }
        let mut assignment = Vec::with_capacity(schema.parameters.len());
        let holds = |lit: &Literal, assignment: &[&str]| {
            let atom = instantiate(lit, &params, assignment);
            init_set.contains(&atom) == lit.positive
        };
        if !constant_checks.iter().all(|l| holds(l, &[])) {
            continue;
        }
        enumerate(&candidates, &checks, &holds, &mut assignment, &mut |assignment| {
            actions.push(build(schema, &params, assignment, &fluent, &mut interner, &options.costs));
        });
    }

    if options.relevance_pruning {
        actions = relevant(actions, &task.goal.iter().map(|a| interner.id(a)).collect::<Vec<_>>());
    }
    actions.sort_by_cached_key(|a| {
        (
            a.schema.clone(),
            a.args.iter().map(|o| position.get(o.as_str()).copied().unwrap_or(usize::MAX)).collect::<Vec<_>>(),
        )
    });

    let mut init = FixedBitSet::with_capacity(interner.atoms.len());
    for a in &task.init {
        init.insert(interner.index[a]);
    }
    let goal: Vec<usize> = {
        let mut g: Vec<usize> = task.goal.iter().map(|a| interner.index[a]).collect();
        g.dedup();
        g
    };
    let by_step = actions.iter().enumerate().map(|(i, a)| ((a.schema.clone(), a.args.clone()), i)).collect();
    Ok(GroundProblem { atoms: interner.atoms, init, goal, actions, index: interner.index, by_step })
}

fn enumerate<'o, F, H>(
    candidates: &[Vec<&'o str>],
    checks: &[Vec<&Literal>],
    holds: &H,
    assignment: &mut Vec<&'o str>,
    emit: &mut F,
) where
    F: FnMut(&[&'o str]),
    H: Fn(&Literal, &[&str]) -> bool,
{
    let i = assignment.len();
    if i == candidates.len() {
        emit(assignment);
        return;
    }
    for &obj in &candidates[i] {
        assignment.push(obj);
        if checks[i].iter().all(|l| holds(l, assignment)) {
            enumerate(candidates, checks, holds, assignment, emit);
        }
        assignment.pop();
    }
}

fn instantiate(lit: &Literal, params: &HashMap<&str, usize>, assignment: &[&str]) -> GroundAtom {
    GroundAtom {
        predicate: lit.predicate.clone(),
        args: lit
            .args
            .iter()
            .map(|a| match a {
                Arg::Var(v) => assignment[params[v.as_str()]].to_string(),
                Arg::Const(c) => c.clone(),
            })
            .collect(),
    }
}

fn build(
    schema: &ActionSchema,
    params: &HashMap<&str, usize>,
    assignment: &[&str],
    fluent: &HashSet<&str>,
    interner: &mut Interner,
    costs: &CostTable,
) -> GroundAction {
    let mut action = GroundAction {
        schema: schema.name.clone(),
        args: assignment.iter().map(|s| s.to_string()).collect(),
        pre_pos: vec![],
        pre_neg: vec![],
        add: vec![],
        del: vec![],
        cost: costs.cost(&schema.name),
    };
    for lit in schema.precondition.iter().filter(|l| fluent.contains(l.predicate.as_str())) {
        let id = interner.id(&instantiate(lit, params, assignment));
        if lit.positive {
            action.pre_pos.push(id);
        } else {
            action.pre_neg.push(id);
        }
    }
    for lit in &schema.effect {
        let id = interner.id(&instantiate(lit, params, assignment));
        if lit.positive {
            action.add.push(id);
        } else {
            action.del.push(id);
        }
    }
    // An atom both deleted and added ends up true.
    action.del.retain(|d| !action.add.contains(d));
    for v in [&mut action.pre_pos, &mut action.pre_neg, &mut action.add, &mut action.del] {
        v.sort_unstable();
        v.dedup();
    }
    action
}

fn relevant(actions: Vec<GroundAction>, goal: &[usize]) -> Vec<GroundAction> {
    let mut need_true: HashSet<usize> = goal.iter().copied().collect();
    let mut need_false: HashSet<usize> = HashSet::new();
    let mut keep = vec![false; actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in actions.iter().enumerate() {
            if keep[i] {
                continue;
            }
            if a.add.iter().any(|x| need_true.contains(x)) || a.del.iter().any(|x| need_false.contains(x)) {
                keep[i] = true;
                changed = true;
                need_true.extend(&a.pre_pos);
                need_false.extend(&a.pre_neg);
            }
        }
        if !changed {
            break;
        }
    }
    actions.into_iter().zip(keep).filter_map(|(a, k)| k.then_some(a)).collect()
}

#[derive(Default)]
struct Interner {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
}

impl Interner {
    fn id(&mut self, atom: &GroundAtom) -> usize {
        if let Some(&i) = self.index.get(atom) {
            return i;
        }
        self.atoms.push(atom.clone());
        self.index.insert(atom.clone(), self.atoms.len() - 1);
        self.atoms.len() - 1
    }
}
