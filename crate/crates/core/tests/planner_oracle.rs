//! Planner soundness and optimality against independent oracles.

mod common;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use qaplan::pddl::TaskProblem;
use qaplan::pipeline::Pipeline;
use qaplan::planner::{
    bfs_solve, ground, ground_with, hadd, solve, validate, CostTable, GroundOptions, GroundProblem, PlanError,
    PlannerConfig, State, Strategy, GET_INFO,
};

const NODE_LIMIT: usize = 10_000;

fn strategies() -> [PlannerConfig; 3] {
    [Strategy::GreedyHadd, Strategy::AstarHadd, Strategy::Bfs]
        .map(|strategy| PlannerConfig { strategy, ..Default::default() })
}

/// Cheapest plan cost by uniform-cost search over the explicit state space.
fn dijkstra(p: &GroundProblem) -> Option<u64> {
    let mut best: HashMap<State, u64> = HashMap::from([(p.init.clone(), 0)]);
    let mut heap = BinaryHeap::from([Reverse((0u64, 0usize))]);
    let mut states = vec![p.init.clone()];
    let mut closed = HashSet::new();
    while let Some(Reverse((g, i))) = heap.pop() {
        let s = states[i].clone();
        if !closed.insert(s.clone()) {
            continue;
        }
        if p.goal.iter().all(|&a| s.contains(a)) {
            return Some(g);
        }
        for a in &p.actions {
            if a.pre_pos.iter().all(|&x| s.contains(x)) && a.pre_neg.iter().all(|&x| !s.contains(x)) {
                let mut next = s.clone();
                for &d in &a.del {
                    next.set(d, false);
                }
                for &x in &a.add {
                    next.insert(x);
                }
                let ng = g + u64::from(a.cost);
                if best.get(&next).is_none_or(|&b| ng < b) {
                    best.insert(next.clone(), ng);
                    states.push(next);
                    heap.push(Reverse((ng, states.len() - 1)));
                }
            }
        }
    }
    None
}

/// Argument objects without a value: second arguments of goal atoms that
/// are not themselves produced for a goal.
fn unvalued_inputs(task: &TaskProblem) -> usize {
    let outputs: HashSet<&str> = task.goal.iter().map(|g| g.args[0].as_str()).collect();
    let valued: HashSet<&str> =
        task.init.iter().filter(|a| a.predicate == "has_value").map(|a| a.args[0].as_str()).collect();
    let inputs: HashSet<&str> = task
        .goal
        .iter()
        .filter_map(|g| g.args.get(1).map(String::as_str))
        .filter(|o| !outputs.contains(o) && !valued.contains(o))
        .collect();
    inputs.len()
}

fn check_problem(name: &str, task: &TaskProblem, p: &GroundProblem) -> (usize, usize) {
    let oracle = bfs_solve(p, NODE_LIMIT);
    let mut lengths = (0, 0);
    for config in strategies() {
        match (solve(p, &config), &oracle) {
            (Ok(plan), Ok(best)) => {
                validate(p, &plan).unwrap_or_else(|e| panic!("{name} {:?}: {e}", config.strategy));
                assert!(best.len() <= plan.len(), "{name}: bfs {} > {:?} {}", best.len(), config.strategy, plan.len());
                let asks = plan.steps.iter().filter(|s| s.schema == GET_INFO).count();
                assert_eq!(asks, unvalued_inputs(task), "{name} {:?}", config.strategy);
                if config.strategy == Strategy::GreedyHadd {
                    lengths = (plan.len(), best.len());
                }
            }
            (Err(PlanError::Unsolvable { .. }), Err(PlanError::Unsolvable { .. })) => {}
            (_, Err(PlanError::LimitExceeded { .. })) => {}
            (got, want) => panic!("{name} {:?}: solve {got:?} vs bfs {want:?}", config.strategy),
        }
    }
    if let Ok(best) = &oracle {
        validate(p, best).unwrap();
    }
    if hadd(p, &p.init).is_none() {
        assert!(matches!(oracle, Err(PlanError::Unsolvable { .. })), "{name}: h = inf but bfs solved");
    }
    lengths
}

#[test]
fn bundled_suite_is_sound_and_agrees_with_bfs() {
    let p = Pipeline::bundled();
    let tasks = common::bundled_tasks(&p);
    assert!(tasks.len() >= 40);
    let mut worst: f64 = 1.0;
    for t in &tasks {
        let (len, best) = check_problem(&t.id, &t.task, &t.problem);
        if best > 0 {
            worst = worst.max(len as f64 / best as f64);
        }
    }
    assert!(worst <= 1.5, "plan length ratio {worst}");
}

#[test]
fn random_tasks_are_sound_and_agree_with_bfs() {
    let p = Pipeline::bundled();
    for (text, task, _) in common::random_tasks(&p, 1000) {
        let problem = ground(&p.domain, &task).unwrap();
        check_problem(&text, &task, &problem);
    }
}

#[test]
fn astar_is_cost_optimal_with_costs() {
    let p = Pipeline::bundled();
    let costs = [
        CostTable::default(),
        CostTable([("get_info_api".to_string(), 3), ("contact_us_api".to_string(), 5)].into_iter().collect()),
        CostTable([("profit_loss_api".to_string(), 7), ("help_api".to_string(), 0)].into_iter().collect()),
    ];
    let astar = PlannerConfig { strategy: Strategy::AstarHadd, ..Default::default() };
    for (text, task, _) in common::random_tasks(&p, 200) {
        for c in &costs {
            let problem =
                ground_with(&p.domain, &task, &GroundOptions { costs: c.clone(), ..Default::default() }).unwrap();
            let optimum = dijkstra(&problem);
            match solve(&problem, &astar) {
                Ok(plan) => assert_eq!(Some(plan.cost()), optimum, "{text}"),
                Err(e) => assert_eq!(optimum, None, "{text}: {e}"),
            }
        }
    }
}

#[test]
fn pruning_does_not_change_solvability() {
    let p = Pipeline::bundled();
    for (text, task, _) in common::random_tasks(&p, 200) {
        let full =
            ground_with(&p.domain, &task, &GroundOptions { relevance_pruning: false, ..Default::default() }).unwrap();
        let pruned = ground(&p.domain, &task).unwrap();
        assert!(pruned.actions.len() <= full.actions.len());
        match (bfs_solve(&full, NODE_LIMIT * 10), bfs_solve(&pruned, NODE_LIMIT)) {
            (Err(PlanError::LimitExceeded { .. }), _) => {}
            (a, b) => assert_eq!(a.map(|p| p.len()).ok(), b.map(|p| p.len()).ok(), "{text}"),
        }
    }
}
