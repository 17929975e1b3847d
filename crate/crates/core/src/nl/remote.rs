//! Parser backed by a text-completion service.
//!
//! The service receives `{"sentence", "predicates", "exemplars"}` as JSON and
//! answers either `{"parse": "..."}` or the bare parse as text. Replies that do
//! not read back as a valid fluent representation are retried.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::babi::Sentence;
use super::parse::{validate_rep, Exemplar, FluentRep, ParserBackend};
use super::NlError;

pub const PROMPT_TEMPLATE: &str = "\
Please parse the sentence provided below into a first-order logic predicate form.
The available predicates names are: {{predicates}}.
{{exemplars}}
Please, provide just the parsing data using the examples format.
The sentence to parse is:
Sentence: {{sentence}}
Semantic parse:";

/// The few-shot prompt for one sentence.
pub fn render_prompt(sentence: &str, predicates: &[String], exemplars: &[Exemplar]) -> String {
    let shots: Vec<String> = exemplars.iter().map(|e| format!("Sentence: {}\nSemantic parse: {}", e.text, e.parse)).collect();
    PROMPT_TEMPLATE
        .replace("{{predicates}}", &predicates.join(", "))
        .replace("{{exemplars}}", &shots.join("\n"))
        .replace("{{sentence}}", sentence)
}

#[derive(Serialize)]
struct Request<'a> {
    sentence: &'a str,
    predicates: &'a [String],
    exemplars: &'a [Exemplar],
}

#[derive(Deserialize)]
struct Reply {
    parse: String,
}

#[derive(Debug, Clone)]
pub struct HttpParser {
    pub endpoint: String,
    pub retries: usize,
    pub timeout: Duration,
    agent: ureq::Agent,
}

impl HttpParser {
    pub fn new(endpoint: &str) -> HttpParser {
        let timeout = Duration::from_secs(30);
        HttpParser { endpoint: endpoint.to_string(), retries: 3, timeout, agent: ureq::AgentBuilder::new().timeout(timeout).build() }
    }

    pub fn with_retries(mut self, retries: usize) -> HttpParser {
        self.retries = retries;
        self
    }

    fn request(&self, body: &Request<'_>) -> Result<String, NlError> {
        let resp = self.agent.post(&self.endpoint).send_json(body).map_err(|e| NlError::Remote(e.to_string()))?;
        let text = resp.into_string().map_err(|e| NlError::Remote(e.to_string()))?;
        Ok(match serde_json::from_str::<Reply>(&text) {
            Ok(r) => r.parse,
            Err(_) => text,
        })
    }
}

impl ParserBackend for HttpParser {
    fn parse(&self, sentence: &Sentence, vocabulary: &[String], exemplars: &[Exemplar]) -> Result<FluentRep, NlError> {
        let body = Request { sentence: &sentence.text, predicates: vocabulary, exemplars };
        let mut last = NlError::Remote("no attempt made".into());
        for attempt in 0..=self.retries {
            let result = self
                .request(&body)
                .and_then(|text| FluentRep::parse(text.lines().next().unwrap_or("")))
                .and_then(|rep| validate_rep(&rep, sentence).map(|_| rep));
            match result {
                Ok(rep) => return Ok(rep),
                Err(e) => {
                    log::warn!("parse attempt {} for `{}` failed: {e}", attempt + 1, sentence.text);
                    last = e;
                }
            }
        }
        Err(last)
    }
}
