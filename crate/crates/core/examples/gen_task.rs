//! Materialized facts → task PDDL plus the binding environment that maps
//! each valued object to its concrete value.

use qaplan::asp::parse_facts;
use qaplan::catalog::Catalog;
use qaplan::pddl::{generate_task, render_task, Domain};
use qaplan::pipeline::Pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pipeline = Pipeline::bundled();
    let catalog = Catalog::bundled();

    // Incomplete: no period, so the start and end dates have no value.
    let facts = parse_facts("_goal(x, goal_1).")?;
    let (task, bindings) = generate_task(&pipeline.materialize(&facts)?, &catalog, "example1")?;
    print!("{}", render_task(&task));
    println!("bindings: {}\n", serde_json::to_string(&bindings)?);

    // Two goals with dataflow: the contact topic is the report itself.
    let facts = parse_facts(
        r#"_goal(x, goal_3). _report_period(x, ("11/01/2023", "11/30/2023")).
           _goal(y, goal_6). _contact_topic(y, x)."#,
    )?;
    let (task, bindings) = generate_task(&pipeline.materialize(&facts)?, &catalog, "dataflow")?;
    print!("{}", render_task(&task));
    println!("bindings: {}", serde_json::to_string(&bindings)?);

    // The task only uses vocabulary the domain declares.
    let domain = Domain::bundled();
    qaplan::pddl::parse_task_checked(&render_task(&task), &domain)?;
    Ok(())
}
