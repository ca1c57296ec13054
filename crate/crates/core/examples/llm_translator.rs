//! Translate through an OpenAI-compatible chat-completions endpoint.
//! The key is read from QAPLAN_LLM_API_KEY; nothing is sent without it.
//!
//!     QAPLAN_LLM_API_KEY=... cargo run --example llm_translator -- \
//!         https://api.example.com gpt-4o "Can I see my P&L for March 2024?"

use qaplan::pipeline::Pipeline;
use qaplan::translator::{Backend, TranslatorConfig, API_KEY_ENV};

fn main() {
    let mut args = std::env::args().skip(1);
    let (Some(endpoint), Some(model)) = (args.next(), args.next()) else {
        eprintln!("usage: llm_translator <endpoint> <model> [query]");
        std::process::exit(64);
    };
    let query = args.next().unwrap_or_else(|| "I want to chat with a representative".into());
    if std::env::var_os(API_KEY_ENV).is_none() {
        eprintln!("set {API_KEY_ENV} to run this example");
        std::process::exit(64);
    }

    let config = TranslatorConfig {
        backend: Backend::Llm,
        endpoint: Some(endpoint),
        model: Some(model),
        temperature: 0.0,
        ..Default::default()
    };
    let pipeline = match Pipeline::bundled().with_translator(&config) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(64);
        }
    };
    match pipeline.answer(&query) {
        Ok(a) => {
            println!("{} attempt(s)", a.attempts);
            print!("{}", a.rendered);
        }
        Err(e) => {
            eprintln!("{}: {e}", e.stage());
            std::process::exit(1);
        }
    }
}
