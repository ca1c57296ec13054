//! Answer natural-language queries by translating them into ASP facts,
//! materializing those facts with domain rules, compiling the result into a
//! PDDL task, and planning an orchestration of API calls over it.

pub mod asp;
pub mod catalog;
pub mod cli;
pub mod eval;
pub mod executor;
pub mod pddl;
pub mod pipeline;
pub mod planner;
pub mod reasoner;
pub mod translator;
