use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::time::Instant;

use super::{GroundProblem, Plan, PlanError, PlannerConfig, State, Strategy};

/// Additive heuristic over the delete relaxation (negative preconditions are
/// ignored as well). `None` means the goal is unreachable even relaxed.
pub fn hadd(problem: &GroundProblem, state: &State) -> Option<u64> {
    Hadd::new(problem).eval(problem, state)
}

struct Hadd {
    /// For each atom, the actions having it as a positive precondition.
    pre_of: Vec<Vec<usize>>,
}

impl Hadd {
    fn new(problem: &GroundProblem) -> Self {
        let mut pre_of = vec![Vec::new(); problem.atoms.len()];
        for (i, a) in problem.actions.iter().enumerate() {
            for &p in &a.pre_pos {
                pre_of[p].push(i);
            }
        }
        Hadd { pre_of }
    }

    fn eval(&self, problem: &GroundProblem, state: &State) -> Option<u64> {
        const INF: u64 = u64::MAX;
        let mut cost = vec![INF; problem.atoms.len()];
        let mut remaining: Vec<usize> = problem.actions.iter().map(|a| a.pre_pos.len()).collect();
        let mut pre_sum = vec![0u64; problem.actions.len()];
        let mut heap = BinaryHeap::new();
        for atom in state.ones() {
            cost[atom] = 0;
            heap.push(Reverse((0u64, atom)));
        }
        let fire = |a: usize, pre: u64, cost: &mut Vec<u64>, heap: &mut BinaryHeap<Reverse<(u64, usize)>>| {
            let action = &problem.actions[a];
            let c = pre.saturating_add(u64::from(action.cost));
            for &e in &action.add {
                if c < cost[e] {
                    cost[e] = c;
                    heap.push(Reverse((c, e)));
                }
            }
        };
        for (i, a) in problem.actions.iter().enumerate() {
            if a.pre_pos.is_empty() {
                fire(i, 0, &mut cost, &mut heap);
            }
        }
        let mut done = vec![false; problem.atoms.len()];
        while let Some(Reverse((c, atom))) = heap.pop() {
            if done[atom] || c > cost[atom] {
                continue;
            }
            done[atom] = true;
            for &a in &self.pre_of[atom] {
                remaining[a] -= 1;
                pre_sum[a] = pre_sum[a].saturating_add(c);
                if remaining[a] == 0 {
                    fire(a, pre_sum[a], &mut cost, &mut heap);
                }
            }
        }
        problem.goal.iter().try_fold(0u64, |acc, &g| (cost[g] != INF).then(|| acc.saturating_add(cost[g])))
    }
}

struct Node {
    state: State,
    parent: Option<(usize, usize)>,
    g: u64,
}

fn extract(problem: &GroundProblem, nodes: &[Node], mut i: usize) -> Plan {
    let mut steps = Vec::new();
    while let Some((parent, action)) = nodes[i].parent {
        steps.push(problem.actions[action].step());
        i = parent;
    }
    steps.reverse();
    Plan { steps }
}

/// Finds a plan with the configured strategy.
///
/// Heuristic searches order the open list by (h, g) for greedy search and
/// (g + h, h) for A*, then by the generating action's canonical index, then
/// first-in-first-out, so results are reproducible.
pub fn solve(problem: &GroundProblem, config: &PlannerConfig) -> Result<Plan, PlanError> {
    let started = Instant::now();
    let deadline = started + config.time_limit;
    if config.strategy == Strategy::Bfs {
        return breadth_first(problem, usize::MAX, Some((deadline, config.time_limit)));
    }
    let astar = config.strategy == Strategy::AstarHadd;
    let h = Hadd::new(problem);
    let mut nodes = vec![Node { state: problem.init.clone(), parent: None, g: 0 }];
    let Some(h0) = h.eval(problem, &problem.init) else {
        return Err(PlanError::Unsolvable { expanded: 0 });
    };
    let key = |g: u64, h: u64| if astar { (g.saturating_add(h), h) } else { (h, g) };
    let mut best_g: HashMap<State, u64> = HashMap::from([(problem.init.clone(), 0)]);
    let mut open = BinaryHeap::new();
    let mut counter = 0usize;
    open.push(Reverse((key(0, h0), 0usize, counter, 0usize)));
    let (mut expanded, mut generated) = (0usize, 1usize);

    while let Some(Reverse((_, _, _, n))) = open.pop() {
        if astar && best_g.get(&nodes[n].state).is_some_and(|&g| g < nodes[n].g) {
            continue;
        }
        if problem.is_goal(&nodes[n].state) {
            return Ok(extract(problem, &nodes, n));
        }
        expanded += 1;
        if expanded % 64 == 0 && Instant::now() >= deadline {
            return Err(PlanError::Timeout { limit: config.time_limit, expanded, generated });
        }
        for (ai, action) in problem.actions.iter().enumerate() {
            if !action.applicable(&nodes[n].state) {
                continue;
            }
            let next = action.apply(&nodes[n].state);
            let g = nodes[n].g + u64::from(action.cost);
            match best_g.entry(next.clone()) {
                Entry::Occupied(mut e) => {
                    if !astar || *e.get() <= g {
                        continue;
                    }
                    e.insert(g);
                }
                Entry::Vacant(e) => {
                    e.insert(g);
                }
            }
            generated += 1;
            let Some(hv) = h.eval(problem, &next) else { continue };
            nodes.push(Node { state: next, parent: Some((n, ai)), g });
            counter += 1;
            open.push(Reverse((key(g, hv), ai, counter, nodes.len() - 1)));
        }
    }
    Err(PlanError::Unsolvable { expanded })
}

/// Breadth-first search: a shortest plan by number of steps. Fails with
/// `LimitExceeded` once more than `node_limit` states have been seen.
pub fn bfs_solve(problem: &GroundProblem, node_limit: usize) -> Result<Plan, PlanError> {
    breadth_first(problem, node_limit, None)
}

fn breadth_first(
    problem: &GroundProblem,
    node_limit: usize,
    deadline: Option<(Instant, std::time::Duration)>,
) -> Result<Plan, PlanError> {
    let mut nodes = vec![Node { state: problem.init.clone(), parent: None, g: 0 }];
    if problem.is_goal(&problem.init) {
        return Ok(Plan::default());
    }
    let mut seen: HashSet<State> = HashSet::from([problem.init.clone()]);
    let mut queue = VecDeque::from([0usize]);
    let mut expanded = 0usize;
    while let Some(n) = queue.pop_front() {
        expanded += 1;
        if let Some((deadline, limit)) = deadline {
            if expanded.is_multiple_of(64) && Instant::now() >= deadline {
                return Err(PlanError::Timeout { limit, expanded, generated: seen.len() });
            }
        }
        for (ai, action) in problem.actions.iter().enumerate() {
            if !action.applicable(&nodes[n].state) {
                continue;
            }
            let next = action.apply(&nodes[n].state);
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= node_limit {
                return Err(PlanError::LimitExceeded { limit: node_limit });
            }
            seen.insert(next.clone());
            let goal = problem.is_goal(&next);
            let g = nodes[n].g + u64::from(action.cost);
            nodes.push(Node { state: next, parent: Some((n, ai)), g });
            if goal {
                return Ok(extract(problem, &nodes, nodes.len() - 1));
            }
            queue.push_back(nodes.len() - 1);
        }
    }
    Err(PlanError::Unsolvable { expanded })
}
