//! Apply the bundled domain rules to intermediate facts. The second input
//! has a reversed report period, so the rules derive an `error` atom.

use qaplan::asp::{parse_facts, render_facts};
use qaplan::pipeline::BUNDLED_RULES;
use qaplan::reasoner::{extract_errors, materialize, parse_rules_with, BuiltinRegistry};

const INPUTS: [&str; 3] = [
    r#"_goal(x, goal_1). _report_period(x, ("07/01/2024", "09/30/2024")).
       _goal(y, goal_6). _contact_topic(y, x). _contact_channel(y, "phone")."#,
    r#"_goal(x, goal_2). _report_period(x, ("07/01/2024", "01/31/2024"))."#,
    r#"_goal(x, goal_6). _contact_channel(x, "speak")."#,
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let builtins = BuiltinRegistry::default();
    let rules = parse_rules_with(BUNDLED_RULES, &builtins)?;
    println!("{} rules loaded\n", rules.len());

    for text in INPUTS {
        let facts = parse_facts(text)?;
        let model = materialize(&facts, &rules, &builtins)?;
        print!("{}", render_facts(&model.derived_only()));
        for message in extract_errors(&model) {
            println!("  => constraint violated: {message}");
        }
        println!();
    }
    Ok(())
}
