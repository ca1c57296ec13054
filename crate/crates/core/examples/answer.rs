//! The whole pipeline for one query, then a stub execution of the plan
//! with scripted answers for the information it has to ask for.
//!
//!     cargo run --example answer -- "Profit and loss report"

use std::collections::BTreeMap;

use qaplan::asp::render_facts;
use qaplan::executor::{execute, InfoSource};
use qaplan::pipeline::{Pipeline, PipelineError};

fn main() {
    let query = std::env::args().nth(1).unwrap_or_else(|| "Profit and loss report".into());
    let pipeline = Pipeline::bundled();

    let answer = match pipeline.answer(&query) {
        Ok(a) => a,
        Err(PipelineError::Constraint(messages)) => {
            for m in messages {
                println!("cannot answer: {m}");
            }
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("{} failed: {e}", e.stage());
            std::process::exit(1);
        }
    };

    println!("intermediate:\n{}", render_facts(&answer.intermediate));
    println!("plan:\n{}", answer.rendered);
    if answer.how_to_only {
        println!("(how-to answer, not executed)");
        return;
    }

    let answers = BTreeMap::from([
        ("start date".to_string(), "01/01/2024".to_string()),
        ("end date".to_string(), "03/31/2024".to_string()),
        ("contact topic".to_string(), "Billing".to_string()),
        ("contact channel".to_string(), "chat".to_string()),
    ]);
    let trace = execute(&answer.plan, &answer.bindings, &pipeline.catalog, &mut InfoSource::AnswerMap(answers));
    for r in &trace.records {
        println!("{:>2}. {:<20} {} = {}", r.step, r.action, r.output, r.value);
    }
    println!("{:?}", trace.status);
}
