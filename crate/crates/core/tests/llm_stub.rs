//! The chat-completions translator against a local stub server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

use qaplan::catalog::Catalog;
use qaplan::pipeline::Pipeline;
use qaplan::translator::{LlmTranslator, TranslateError, Translator, TranslatorConfig, API_KEY_ENV};

struct Request {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves the scripted `(status, body)` replies in order, one connection
/// each, and records the requests.
fn stub(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Request>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let log = Arc::new(Mutex::new(Vec::new()));
    let seen = Arc::clone(&log);
    thread::spawn(move || {
        for (status, body) in replies {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let (mut length, mut authorization) = (0, None);
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            seen.lock().unwrap().push(Request {
                path: request_line.split_whitespace().nth(1).unwrap_or_default().to_string(),
                authorization,
                body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
            });
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (url, log)
}

fn completion(content: &str) -> (u16, String) {
    (200, json!({ "choices": [{ "message": { "role": "assistant", "content": content } }] }).to_string())
}

fn translator(url: &str) -> LlmTranslator {
    let config = TranslatorConfig { temperature: 0.0, max_retries: 2, ..Default::default() };
    LlmTranslator::new(url.to_string(), "stub-model".into(), "secret".into(), &config).unwrap()
}

const EXPENSE: &str = "Show me 2023 Q1 detailed expense report";
const EXPENSE_FACTS: &str = "_goal(x, goal_2).\n_report_period(x, (\"01/01/2023\", \"03/31/2023\")).\n";

#[test]
fn request_shape_and_fenced_reply() {
    let (url, log) = stub(vec![completion(&format!("Answer:\n```\n{EXPENSE_FACTS}```"))]);
    let result = translator(&url).translate(EXPENSE, &Catalog::bundled()).unwrap();
    assert_eq!(result.facts.to_string(), EXPENSE_FACTS);
    assert_eq!(result.attempts, 1);

    let log = log.lock().unwrap();
    assert_eq!(log.len(), 1);
    let r = &log[0];
    assert_eq!(r.path, "/v1/chat/completions");
    assert_eq!(r.authorization.as_deref(), Some("Bearer secret"));
    assert_eq!(r.body["model"], "stub-model");
    assert_eq!(r.body["temperature"], 0.0);
    let messages = r.body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 2);
    assert_eq!(messages[0]["role"], "system");
    assert_eq!(messages[1]["role"], "user");
    assert_eq!(messages[1]["content"], Catalog::bundled().build_prompt(EXPENSE));
}

#[test]
fn malformed_replies_are_retried() {
    let (url, log) = stub(vec![completion("I am not sure."), completion(EXPENSE_FACTS)]);
    let result = translator(&url).translate(EXPENSE, &Catalog::bundled()).unwrap();
    assert_eq!(result.attempts, 2);
    assert_eq!(log.lock().unwrap().len(), 2);

    let (url, log) = stub(vec![
        completion("nothing"),
        completion("goal(x, expense_spend_report)."),
        completion("_report_period(x, (\"01/01/2023\", \"03/31/2023\"))."),
    ]);
    let err = translator(&url).translate(EXPENSE, &Catalog::bundled()).unwrap_err();
    assert!(matches!(err, TranslateError::TranslationFailed { attempts: 3, .. }), "{err}");
    assert_eq!(log.lock().unwrap().len(), 3);
}

#[test]
fn transport_errors_are_not_retried() {
    let (url, log) = stub(vec![(500, "{\"error\": \"overloaded\"}".into()), completion(EXPENSE_FACTS)]);
    let err = translator(&url).translate(EXPENSE, &Catalog::bundled()).unwrap_err();
    match err {
        TranslateError::TransportError(m) => assert!(m.contains("500") && m.contains("overloaded"), "{m}"),
        other => panic!("{other:?}"),
    }
    assert_eq!(log.lock().unwrap().len(), 1);

    let (url, _) = stub(vec![(200, "{}".into())]);
    assert!(matches!(translator(&url).translate(EXPENSE, &Catalog::bundled()), Err(TranslateError::TransportError(_))));

    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", closed.local_addr().unwrap());
    drop(closed);
    assert!(matches!(translator(&url).translate(EXPENSE, &Catalog::bundled()), Err(TranslateError::TransportError(_))));
}

#[test]
fn llm_backend_drives_the_pipeline() {
    let fixture = Pipeline::bundled().answer(EXPENSE).unwrap();
    let (url, _) = stub(vec![completion(EXPENSE_FACTS)]);
    let mut p = Pipeline::bundled();
    p.translator = Box::new(translator(&url));
    let a = p.answer(EXPENSE).unwrap();
    assert_eq!(a.intermediate, fixture.intermediate);
    assert_eq!(a.rendered, fixture.rendered);
}

#[test]
fn config_reads_key_from_environment() {
    let (url, log) = stub(vec![completion(EXPENSE_FACTS)]);
    std::env::set_var(API_KEY_ENV, "from-env");
    let config = TranslatorConfig {
        backend: qaplan::translator::Backend::Llm,
        endpoint: Some(url),
        model: Some("m".into()),
        ..Default::default()
    };
    let t = config.build().unwrap();
    t.translate(EXPENSE, &Catalog::bundled()).unwrap();
    assert_eq!(log.lock().unwrap()[0].authorization.as_deref(), Some("Bearer from-env"));
}
