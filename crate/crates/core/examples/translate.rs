//! Natural-language query → intermediate ASP facts, using the bundled
//! fixture translator. Also shows the prompt an LLM backend would receive.
//!
//!     cargo run --example translate -- "Show me 2023 Q1 detailed expense report"

use qaplan::asp::render_facts;
use qaplan::catalog::Catalog;
use qaplan::translator::{FixtureTranslator, Translator};

fn main() {
    let query = std::env::args().nth(1).unwrap_or_else(|| "Show me 2023 Q1 detailed expense report".into());
    let catalog = Catalog::bundled();
    let translator = FixtureTranslator::bundled();

    match translator.translate(&query, &catalog) {
        Ok(result) => print!("{}", render_facts(&result.facts)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }

    let prompt = catalog.build_prompt(&query);
    println!("\n-- LLM prompt: {} lines, {} goals described --", prompt.lines().count(), catalog.goals.len());
    for line in prompt.lines().rev().take(3).collect::<Vec<_>>().into_iter().rev() {
        println!("{line}");
    }
}
