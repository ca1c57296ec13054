//! Ground a task against the bundled domain and compare the search
//! strategies with breadth-first search. Every plan is re-checked by the
//! validator.

use std::time::Instant;

use qaplan::pddl::{parse_task, Domain};
use qaplan::planner::{bfs_solve, ground_with, solve, validate, CostTable, GroundOptions, PlannerConfig, Strategy};

const TASK: &str = "(define (problem three_goals)
    (:domain gen-orch-planner)
    (:objects
        invoice_sales_report date contact contact_topic contact_channel help string - var_type
        x x_start_date x_end_date y y_contact_channel z z_help_topic - var
    )
    (:init
        (has_type x invoice_sales_report)
        (has_type x_start_date date)
        (has_value x_start_date)
        (has_type x_end_date date)
        (has_value x_end_date)
        (has_type y contact)
        (has_type x contact_topic)
        (has_type y_contact_channel contact_channel)
        (has_type z help)
        (has_type z_help_topic string)
    )
    (:goal (and
        (report_start_date x x_start_date)
        (report_end_date x x_end_date)
        (contact_us_topic y x)
        (contact_us_channel y y_contact_channel)
        (help_topic z z_help_topic)
    ))
)
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let domain = Domain::bundled();
    let task = parse_task(TASK)?;

    // asking the user is made expensive; A* still has to ask twice
    let costs = CostTable([("get_info_api".to_string(), 5)].into_iter().collect());
    let problem = ground_with(&domain, &task, &GroundOptions { costs, ..Default::default() })?;
    println!("{} ground actions, {} atoms", problem.actions.len(), problem.atoms.len());

    for strategy in [Strategy::GreedyHadd, Strategy::AstarHadd, Strategy::Bfs] {
        let started = Instant::now();
        let plan = solve(&problem, &PlannerConfig { strategy, ..Default::default() })?;
        validate(&problem, &plan)?;
        println!("\n{strategy:?}: {} steps, cost {}, {:.2?}", plan.len(), plan.cost(), started.elapsed());
        for step in &plan.steps {
            println!("  {}({})", step.schema, step.args.join(", "));
        }
    }

    let shortest = bfs_solve(&problem, 10_000)?;
    println!("\nshortest plan has {} steps", shortest.len());
    Ok(())
}
