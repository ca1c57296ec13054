//! Natural-language query to intermediate representation.
//!
//! Two backends: a fixture table keyed by the normalized query, and an
//! OpenAI-compatible chat-completions client.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::asp::{parse_facts, FactSet};
use crate::catalog::Catalog;

/// Environment variable holding the bearer token for the LLM endpoint.
pub const API_KEY_ENV: &str = "QAPLAN_LLM_API_KEY";

/// The fixtures shipped with the crate.
pub const BUNDLED_FIXTURES: &str = include_str!("../data/fixtures.json");

const SYSTEM_MESSAGE: &str =
    "You translate user queries into ASP facts. Reply with the facts only, one per line, each ending with a period.";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("translation failed after {attempts} attempt(s): {reason}")]
    TranslationFailed { attempts: u32, reason: String },
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("no fixture for query `{0}`")]
    FixtureMiss(String),
    #[error("invalid fixtures: {0}")]
    Fixtures(String),
    #[error("translator configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationResult {
    pub facts: FactSet,
    pub raw_response: String,
    pub attempts: u32,
}

pub trait Translator {
    fn translate(&self, query: &str, catalog: &Catalog) -> Result<TranslationResult, TranslateError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Llm,
    #[default]
    Fixture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslatorConfig {
    pub backend: Backend,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout: Duration,
    /// `None` selects the bundled fixtures.
    pub fixtures_path: Option<PathBuf>,
}

impl Default for TranslatorConfig {
    fn default() -> Self {
        TranslatorConfig {
            backend: Backend::Fixture,
            endpoint: None,
            model: None,
            temperature: 0.0,
            max_retries: 2,
            timeout: Duration::from_secs(60),
            fixtures_path: None,
        }
    }
}

impl TranslatorConfig {
    /// Builds the configured backend. The LLM backend reads its API key from
    /// [`API_KEY_ENV`].
    pub fn build(&self) -> Result<Box<dyn Translator>, TranslateError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(TranslateError::Config(format!("temperature {} is outside [0, 2]", self.temperature)));
        }
        match self.backend {
            Backend::Fixture => Ok(Box::new(match &self.fixtures_path {
                Some(path) => FixtureTranslator::from_path(path)?,
                None => FixtureTranslator::bundled(),
            })),
            Backend::Llm => {
                let endpoint =
                    self.endpoint.clone().ok_or_else(|| TranslateError::Config("missing endpoint".into()))?;
                let model = self.model.clone().ok_or_else(|| TranslateError::Config("missing model".into()))?;
                let api_key = std::env::var(API_KEY_ENV)
                    .map_err(|_| TranslateError::Config(format!("environment variable {API_KEY_ENV} is not set")))?;
                Ok(Box::new(LlmTranslator::new(endpoint, model, api_key, self)?))
            }
        }
    }
}

/// Trims, lowercases and collapses internal whitespace.
pub fn normalize_query(query: &str) -> String {
    query.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureRecord {
    pub query: String,
    pub facts: String,
    /// Date against which relative periods ("previous quarter") were
    /// resolved when the facts were written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_date: Option<String>,
}

pub struct FixtureTranslator {
    table: HashMap<String, (String, FactSet)>,
}

impl FixtureTranslator {
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_FIXTURES).expect("bundled fixtures are valid")
    }

    pub fn from_path(path: &Path) -> Result<Self, TranslateError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| TranslateError::Fixtures(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, TranslateError> {
        let records: Vec<FixtureRecord> =
            serde_json::from_str(text).map_err(|e| TranslateError::Fixtures(e.to_string()))?;
        let mut table = HashMap::new();
        for r in records {
            let facts =
                parse_facts(&r.facts).map_err(|e| TranslateError::Fixtures(format!("facts for `{}`: {e}", r.query)))?;
            let key = normalize_query(&r.query);
            if table.insert(key, (r.facts, facts)).is_some() {
                return Err(TranslateError::Fixtures(format!("duplicate query `{}`", r.query)));
            }
        }
        Ok(FixtureTranslator { table })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

impl Translator for FixtureTranslator {
    fn translate(&self, query: &str, _catalog: &Catalog) -> Result<TranslationResult, TranslateError> {
        if query.trim().is_empty() {
            return Err(TranslateError::EmptyQuery);
        }
        let (raw, facts) =
            self.table.get(&normalize_query(query)).ok_or_else(|| TranslateError::FixtureMiss(query.to_string()))?;
        check(facts).map_err(|reason| TranslateError::TranslationFailed { attempts: 1, reason })?;
        Ok(TranslationResult { facts: facts.clone(), raw_response: raw.clone(), attempts: 1 })
    }
}

fn check(facts: &FactSet) -> Result<(), String> {
    if let Some(a) = facts.iter().find(|a| !a.is_intermediate()) {
        return Err(format!("`{a}` is not an intermediate-representation atom"));
    }
    if facts.with_predicate("_goal").next().is_none() {
        return Err("no `_goal` atom".into());
    }
    Ok(())
}

/// The last contiguous run of lines that parses as facts, all of them
/// intermediate-representation atoms. Code-fence lines are ignored.
pub fn extract_facts(response: &str) -> Option<FactSet> {
    let lines: Vec<&str> = response.lines().filter(|l| !l.trim_start().starts_with("```")).collect();
    for end in (1..=lines.len()).rev() {
        if lines[end - 1].trim().is_empty() {
            continue;
        }
        for start in 0..end {
            if let Ok(facts) = parse_facts(&lines[start..end].join("\n")) {
                if !facts.is_empty() && facts.iter().all(|a| a.is_intermediate()) {
                    return Some(facts);
                }
            }
        }
    }
    None
}

pub struct LlmTranslator {
    endpoint: String,
    model: String,
    api_key: String,
    temperature: f64,
    max_retries: u32,
    client: reqwest::blocking::Client,
}

impl LlmTranslator {
    pub fn new(
        endpoint: String,
        model: String,
        api_key: String,
        config: &TranslatorConfig,
    ) -> Result<Self, TranslateError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| TranslateError::TransportError(e.to_string()))?;
        Ok(LlmTranslator {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model,
            api_key,
            temperature: config.temperature,
            max_retries: config.max_retries,
            client,
        })
    }

    /// One chat-completion round trip; returns the assistant message.
    pub fn llm_chat(&self, prompt: &str) -> Result<String, TranslateError> {
        let body = json!({
            "model": self.model,
            "messages": [
                { "role": "system", "content": SYSTEM_MESSAGE },
                { "role": "user", "content": prompt },
            ],
            "temperature": self.temperature,
        });
        let response = self
            .client
            .post(format!("{}/chat/completions", self.endpoint))
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| TranslateError::TransportError(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| TranslateError::TransportError(e.to_string()))?;
        if !status.is_success() {
            let excerpt: String = text.chars().take(200).collect();
            return Err(TranslateError::TransportError(format!("HTTP {status}: {excerpt}")));
        }
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| TranslateError::TransportError(format!("response is not JSON: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TranslateError::TransportError("response has no choices[0].message.content".into()))
    }
}

impl Translator for LlmTranslator {
    /// Retries with the same prompt when the reply holds no usable facts.
    fn translate(&self, query: &str, catalog: &Catalog) -> Result<TranslationResult, TranslateError> {
        if query.trim().is_empty() {
            return Err(TranslateError::EmptyQuery);
        }
        let prompt = catalog.build_prompt(query);
        let mut reason = String::new();
        for attempt in 1..=self.max_retries + 1 {
            let raw = self.llm_chat(&prompt)?;
            match extract_facts(&raw) {
                Some(facts) => match check(&facts) {
                    Ok(()) => return Ok(TranslationResult { facts, raw_response: raw, attempts: attempt }),
                    Err(r) => reason = r,
                },
                None => reason = "no parseable block of facts in the response".into(),
            }
        }
        Err(TranslateError::TranslationFailed { attempts: self.max_retries + 1, reason })
    }
}
