//! The `qaplan` binary: stage composition, exit codes and output formats.

mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn qaplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaplan")).args(args).env_remove("QAPLAN_LLM_API_KEY").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn answer_prints_the_plan() {
    let o = qaplan(&["answer", "Show me 2023 Q1 detailed expense report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "Step 1. x_start_date = \"01/01/2023\";\n\
         Step 2. x_end_date = \"03/31/2023\";\n\
         Step 3. x = expense_spend_api(x_start_date, x_end_date);\n"
    );
}

#[test]
fn exit_codes() {
    let o = qaplan(&["answer", "Show me expense report from July 2024 to Jan 2024"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("end date must be after start date"));
    assert!(stdout(&o).is_empty());

    assert_eq!(qaplan(&["answer", ""]).status.code(), Some(64));
    assert_eq!(qaplan(&["answer"]).status.code(), Some(64));
    assert_eq!(qaplan(&["--format", "yaml", "answer", "x"]).status.code(), Some(64));
    assert_eq!(qaplan(&["answer", "Tell me a joke"]).status.code(), Some(1));
    assert_eq!(qaplan(&["eval", "--dataset", "/no/such/dataset.jsonl"]).status.code(), Some(66));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("facts.lp");
    std::fs::write(&bad, "_goal(x, goal_1").unwrap();
    assert_eq!(qaplan(&["gen-task", "--facts", path(&bad)]).status.code(), Some(65));
    assert_eq!(qaplan(&["materialize", "--facts", path(&bad)]).status.code(), Some(65));
    let bad_dataset = dir.path().join("d.jsonl");
    std::fs::write(&bad_dataset, "{\"id\": 3}\n").unwrap();
    let o = qaplan(&["eval", "--dataset", path(&bad_dataset)]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("line 1"));
    assert_eq!(qaplan(&["--catalog", "/no/such/catalog.json", "answer", "x"]).status.code(), Some(66));
}

#[test]
fn llm_backend_needs_key_from_environment() {
    let o =
        qaplan(&["--translator", "llm", "--llm-endpoint", "http://127.0.0.1:9", "--llm-model", "m", "translate", "hi"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("QAPLAN_LLM_API_KEY"));
    // there is no flag for the key
    let o = qaplan(&["--llm-api-key", "k", "translate", "hi"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn gen_task_for_profit_and_loss_report() {
    let o = qaplan(&["gen-task", "Profit and loss report", "--name", "example1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "(define (problem example1)
    (:domain gen-orch-planner)
    (:objects
        profit_loss_report date - var_type
        x x_start_date x_end_date - var
    )
    (:init
        (has_type x profit_loss_report)
        (has_type x_start_date date)
        (has_type x_end_date date)
    )
    (:goal (and
        (report_start_date x x_start_date)
        (report_end_date x x_end_date)
    ))
)
"
    );
}

/// translate | materialize | gen-task | plan gives the same listing as
/// answer, for every bundled query.
#[test]
fn stage_commands_compose_to_answer() {
    let dir = tempfile::tempdir().unwrap();
    for case in common::dataset().into_iter().filter(|c| c.expect_error.is_none()) {
        let facts = dir.path().join(format!("{}.lp", case.id));
        let materialized = dir.path().join(format!("{}.m.lp", case.id));
        let task = dir.path().join(format!("{}.pddl", case.id));
        let bindings = dir.path().join(format!("{}.json", case.id));

        let o = qaplan(&["translate", &case.query]);
        assert_eq!(o.status.code(), Some(0), "{}", case.id);
        std::fs::write(&facts, &o.stdout).unwrap();
        let o = qaplan(&["materialize", "--facts", path(&facts)]);
        std::fs::write(&materialized, &o.stdout).unwrap();
        let o = qaplan(&["gen-task", "--facts", path(&materialized), "--bindings-out", path(&bindings)]);
        assert_eq!(o.status.code(), Some(0), "{}", case.id);
        std::fs::write(&task, &o.stdout).unwrap();
        let staged = qaplan(&["plan", path(&task), "--bindings", path(&bindings)]);
        let direct = qaplan(&["answer", &case.query]);
        assert_eq!(stdout(&staged), stdout(&direct), "{}", case.id);
    }
}

#[test]
fn eval_json_is_perfect_and_deterministic() {
    let o = qaplan(&["--format", "json", "eval", "--runs", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["overall"]["success_rate"], 1.0);
    assert_eq!(report["variance"], 0.0);
    assert_eq!(report["run_success"].as_array().unwrap().len(), 5);
    assert!(report["failures"].as_array().unwrap().is_empty());

    let text = qaplan(&["eval"]);
    assert!(stdout(&text).contains("3_apis_with_dataflow"));
    assert_eq!(stdout(&text), stdout(&qaplan(&["eval"])));
}

#[test]
fn execute_with_answers_and_interactively() {
    let dir = tempfile::tempdir().unwrap();
    let answers = dir.path().join("answers.json");
    std::fs::write(&answers, r#"{"start date": "01/01/2023", "x_end_date": "03/31/2023"}"#).unwrap();
    let o = qaplan(&["answer", "Profit and loss report", "--execute", "--answers", path(&answers)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("profit_loss_api#3"), "{out}");
    assert!(out.ends_with("completed\n"));

    let mut child = Command::new(env!("CARGO_BIN_EXE_qaplan"))
        .args(["answer", "I want to chat with a representative", "--execute"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"Billing\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("? contact topic (contact_topic): "), "{out}");
    assert!(out.contains("x_contact_topic=Billing"), "{out}");

    // empty answer aborts
    let mut child = Command::new(env!("CARGO_BIN_EXE_qaplan"))
        .args(["answer", "I want to chat with a representative", "--execute"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("aborted at step 1"));
}

#[test]
fn how_to_plans_are_not_executed() {
    let o = qaplan(&["answer", "How do I reconcile my bank account?", "--execute"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "Step 1. x_help_topic = \"reconciliation\";\nStep 2. x = help_api(x_help_topic);\n");
}

#[test]
fn json_formats() {
    let o = qaplan(&["--format", "json", "answer", "Profit and loss report"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["answer"]["plan"].as_array().unwrap().len(), 3);
    assert_eq!(v["answer"]["intermediate"], "_goal(x, goal_1).\n");
    let o = qaplan(&["--format", "json", "translate", "Profit and loss report"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["facts"], "_goal(x, goal_1).\n");
}

#[test]
fn costs_and_strategy_flags() {
    let dir = tempfile::tempdir().unwrap();
    let costs = dir.path().join("costs.json");
    std::fs::write(&costs, r#"{"get_info_api": 4}"#).unwrap();
    for strategy in ["greedy_hadd", "astar_hadd", "bfs"] {
        let o = qaplan(&[
            "--strategy",
            strategy,
            "--costs",
            path(&costs),
            "--format",
            "json",
            "answer",
            "Profit and loss report",
        ]);
        assert_eq!(o.status.code(), Some(0), "{strategy}: {}", stderr(&o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        let cost: u64 = v["answer"]["plan"].as_array().unwrap().iter().map(|s| s["cost"].as_u64().unwrap()).sum();
        assert_eq!(cost, 9, "{strategy}");
    }
}
