#![allow(dead_code)]

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use qaplan::asp::{parse_facts, Atom, FactSet, Term};
use qaplan::eval::{parse_dataset, DatasetCase, BUNDLED_DATASET};
use qaplan::pddl::{generate_task, BindingEnv, GroundAtom, TaskProblem, TypedName};
use qaplan::pipeline::Pipeline;
use qaplan::planner::{ground, GroundProblem};

pub fn dataset() -> Vec<DatasetCase> {
    parse_dataset(BUNDLED_DATASET).unwrap()
}

pub struct BundledTask {
    pub id: String,
    pub task: TaskProblem,
    pub bindings: BindingEnv,
    pub problem: GroundProblem,
}

/// Planning tasks for every bundled case that is expected to plan.
pub fn bundled_tasks(p: &Pipeline) -> Vec<BundledTask> {
    dataset()
        .into_iter()
        .filter(|c| c.expect_error.is_none())
        .map(|c| {
            let facts = p.translate(&c.query).unwrap().facts;
            let m = p.materialize(&facts).unwrap();
            let (task, bindings) = generate_task(&m, &p.catalog, &c.id).unwrap();
            let problem = ground(&p.domain, &task).unwrap();
            BundledTask { id: c.id, task, bindings, problem }
        })
        .collect()
}

const VARS: [&str; 3] = ["x", "y", "z"];

/// One goal with a random subset of its arguments. `topic_ref` makes a
/// contact or help topic point at an earlier goal.
fn goal_facts(v: usize) -> impl Strategy<Value = Vec<String>> {
    let x = VARS[v];
    (1usize..=9, any::<u64>(), prop::bool::ANY).prop_map(move |(g, seed, dataflow)| {
        let mut lines = vec![format!("_goal({x}, goal_{g}).")];
        let mut s = seed;
        let mut coin = |n: u64| {
            let r = s % n;
            s /= n;
            r
        };
        let periods = [("01/01/2023", "03/31/2023"), ("07/01/2024", "09/30/2024"), ("11/01/2023", "11/30/2023")];
        match g {
            1..=3 => {
                if coin(2) == 0 {
                    let (a, b) = periods[coin(3) as usize];
                    lines.push(format!("_report_period({x}, (\"{a}\", \"{b}\"))."));
                }
            }
            4 => {
                if coin(2) == 0 {
                    lines
                        .push(format!("_date_of_charge({x}, \"{}\").", ["11/01/2023", "02/21/2018"][coin(2) as usize]));
                }
                if coin(2) == 0 {
                    lines.push(format!("_amount_of_charge({x}, \"{}\").", ["65.00", "4500.00"][coin(2) as usize]));
                }
            }
            5 => match coin(3) {
                0 if v > 0 && dataflow => lines.push(format!("_help_topic({x}, {}).", VARS[coin(v as u64) as usize])),
                1 => lines.push(format!("_help_topic({x}, \"payroll\").")),
                _ => {}
            },
            6 => {
                match coin(3) {
                    0 if v > 0 && dataflow => {
                        lines.push(format!("_contact_topic({x}, {}).", VARS[coin(v as u64) as usize]))
                    }
                    1 => lines.push(format!("_contact_topic({x}, \"Billing\").")),
                    _ => {}
                }
                if coin(2) == 0 {
                    let ch = ["chat", "phone", "video", "speak"][coin(4) as usize];
                    lines.push(format!("_contact_channel({x}, \"{ch}\")."));
                }
            }
            8 => {
                if coin(2) == 0 {
                    lines.push(format!("_invoice_amount({x}, \"200.00\")."));
                }
                if coin(2) == 0 {
                    lines.push(format!("_invoice_detail({x}, \"Website Design\")."));
                }
            }
            9 => {
                for (p, val) in [
                    ("customer_given_name", "John"),
                    ("customer_family_name", "Smith"),
                    ("customer_email", "j.fischer@abc.com"),
                    ("customer_phone", "987-654-3210"),
                ] {
                    if coin(2) == 0 {
                        lines.push(format!("_{p}({x}, \"{val}\")."));
                    }
                }
            }
            _ => {}
        }
        lines
    })
}

/// Intermediate representations with one to three random goals.
pub fn intermediate_strategy() -> impl Strategy<Value = String> {
    (1usize..=3)
        .prop_flat_map(|n| (0..n).map(goal_facts).collect::<Vec<_>>().prop_map(|goals| goals.concat().join("\n")))
}

/// `n` deterministic samples of `strategy`.
pub fn samples<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n).map(|_| strategy.new_tree(&mut runner).unwrap().current()).collect()
}

/// Random planning tasks (materialization never fails for these).
pub fn random_tasks(p: &Pipeline, n: usize) -> Vec<(String, TaskProblem, BindingEnv)> {
    samples(intermediate_strategy(), n)
        .into_iter()
        .enumerate()
        .map(|(i, text)| {
            let facts: FactSet = parse_facts(&text).unwrap();
            let m = p.materialize(&facts).unwrap();
            let (task, bindings) = generate_task(&m, &p.catalog, &format!("r{i}")).unwrap();
            (text, task, bindings)
        })
        .collect()
}

/// Random intermediate representations, sometimes with a reversed period
/// so that error atoms are derived too.
pub fn fact_sets(n: usize) -> Vec<FactSet> {
    let extra = prop_oneof![
        Just(String::new()),
        Just("_report_period(x, (\"09/30/2024\", \"07/01/2024\")).".to_string()),
        Just("_goal(w, goal_2). _report_period(w, (\"12/31/2023\", \"01/01/2023\")).".to_string()),
        Just("_contact_channel(q, \"chat\"). _help_topic(q, \"budget\").".to_string()),
    ];
    samples((intermediate_strategy(), extra), n)
        .into_iter()
        .map(|(a, b)| parse_facts(&format!("{a}\n{b}")).unwrap())
        .collect()
}

fn symbol() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![symbol().prop_map(Term::Symbol), "[ !#-\\[\\]-~]{0,12}".prop_map(Term::Str),];
    leaf.prop_recursive(2, 8, 3, |inner| vec(inner, 1..4).prop_map(Term::Tuple))
}

pub fn atom() -> impl Strategy<Value = Atom> {
    ("_?[a-z][a-z0-9_]{0,6}", vec(term(), 0..4)).prop_map(|(p, terms)| Atom::new(p, terms))
}

pub fn task() -> impl Strategy<Value = TaskProblem> {
    (symbol(), btree_set("[a-z][a-z0-9_-]{0,5}", 1..8)).prop_flat_map(|(name, objects)| {
        let objects: Vec<String> = objects.into_iter().collect();
        let n = objects.len();
        let typed = vec(prop::bool::ANY, n).prop_map({
            let objects = objects.clone();
            move |flags| {
                objects
                    .iter()
                    .zip(flags)
                    .map(|(o, f)| TypedName::new(o.clone(), if f { "var" } else { "var_type" }))
                    .collect::<Vec<_>>()
            }
        });
        let ground_atom = move || {
            let objects = objects.clone();
            (symbol(), vec(0..n, 0..3))
                .prop_map(move |(p, args)| GroundAtom::new(p, args.into_iter().map(|i| objects[i].clone())))
        };
        (Just(name), typed, btree_set(ground_atom(), 0..6), btree_set(ground_atom(), 0..6)).prop_map(
            |(name, objects, init, goal)| TaskProblem {
                name,
                domain_name: "gen-orch-planner".into(),
                objects,
                init: init.into_iter().collect(),
                goal: goal.into_iter().collect(),
            },
        )
    })
}
