use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BabiError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: sentence id {found} does not follow {previous}")]
    NonMonotonic { line: usize, previous: usize, found: usize },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wh {
    What,
    Where,
    When,
    Who,
    Why,
    HowMany,
    YesNo,
}

impl Wh {
    /// Question kind from the leading words.
    pub fn detect(text: &str) -> Wh {
        let lower = text.trim().to_lowercase();
        let mut words = lower.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty());
        match (words.next(), words.next()) {
            (Some("what"), _) => Wh::What,
            (Some("where"), _) => Wh::Where,
            (Some("when"), _) => Wh::When,
            (Some("who"), _) => Wh::Who,
            (Some("why"), _) => Wh::Why,
            (Some("how"), Some("many")) => Wh::HowMany,
            _ => Wh::YesNo,
        }
    }
}

impl fmt::Display for Wh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wh::What => "what",
            Wh::Where => "where",
            Wh::When => "when",
            Wh::Who => "who",
            Wh::Why => "why",
            Wh::HowMany => "how_many",
            Wh::YesNo => "yesno",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub correct: Vec<String>,
    pub supporting: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// Time point: position among the story's statements. A question carries
    /// the time at which it is asked, one past the preceding statement.
    pub index: usize,
    pub text: String,
    pub is_question: bool,
    pub negated: bool,
    pub wh: Option<Wh>,
    pub answer_key: Option<AnswerKey>,
}

impl Sentence {
    pub fn statement(index: usize, text: &str) -> Sentence {
        Sentence { index, text: text.to_string(), is_question: false, negated: false, wh: None, answer_key: None }
    }

    pub fn question(index: usize, text: &str, correct: &[&str]) -> Sentence {
        Sentence {
            index,
            text: text.to_string(),
            is_question: true,
            negated: false,
            wh: Some(Wh::detect(text)),
            answer_key: Some(AnswerKey { correct: correct.iter().map(|s| s.to_string()).collect(), supporting: vec![] }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub id: usize,
    pub sentences: Vec<Sentence>,
}

impl Story {
    pub fn statements(&self) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(|s| !s.is_question)
    }

    pub fn questions(&self) -> impl Iterator<Item = &Sentence> {
        self.sentences.iter().filter(|s| s.is_question)
    }
}

pub fn load_babi(path: &Path) -> Result<Vec<Story>, BabiError> {
    let text = std::fs::read_to_string(path).map_err(|source| BabiError::Io { path: path.display().to_string(), source })?;
    parse_babi(&text)
}

/// Parses the bAbI line format: `N text`, or `N question<TAB>answers<TAB>ids`
/// for questions. `N` restarting at 1 opens a new story.
pub fn parse_babi(text: &str) -> Result<Vec<Story>, BabiError> {
    let mut stories: Vec<Story> = Vec::new();
    let mut prev_id = 0usize;
    let mut statements = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let malformed = |msg: &str| BabiError::Malformed { line, msg: msg.to_string() };
        let (num, rest) = raw.trim_start().split_once(' ').ok_or_else(|| malformed("expected `N text`"))?;
        let id: usize = num.parse().map_err(|_| malformed("sentence id is not a number"))?;
        if id == 1 {
            stories.push(Story { id: stories.len() + 1, sentences: vec![] });
            statements = 0;
        } else if id != prev_id + 1 || stories.is_empty() {
            return Err(BabiError::NonMonotonic { line, previous: prev_id, found: id });
        }
        prev_id = id;
        let story = stories.last_mut().expect("story opened above");
        let fields: Vec<&str> = rest.split('\t').collect();
        match fields.len() {
            1 => {
                let text = fields[0].trim();
                if text.is_empty() {
                    return Err(malformed("empty sentence"));
                }
                statements += 1;
                story.sentences.push(Sentence::statement(statements, text));
            }
            2 | 3 => {
                let text = fields[0].trim();
                let correct: Vec<String> = fields[1].split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                if text.is_empty() || correct.is_empty() {
                    return Err(malformed("question needs text and an answer"));
                }
                let supporting = match fields.get(2) {
                    Some(ids) => ids
                        .split_whitespace()
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| malformed("supporting ids must be numbers"))?,
                    None => vec![],
                };
                story.sentences.push(Sentence {
                    index: statements + 1,
                    text: text.to_string(),
                    is_question: true,
                    negated: false,
                    wh: Some(Wh::detect(text)),
                    answer_key: Some(AnswerKey { correct, supporting }),
                });
            }
            _ => return Err(malformed("too many tab-separated fields")),
        }
    }
    Ok(stories)
}

/// Inverse of [`parse_babi`] for stories whose sentence ids are implicit.
pub fn write_babi(stories: &[Story]) -> String {
    let mut out = String::new();
    for story in stories {
        for (i, s) in story.sentences.iter().enumerate() {
            let n = i + 1;
            match &s.answer_key {
                Some(key) if s.is_question => {
                    let ids: Vec<String> = key.supporting.iter().map(ToString::to_string).collect();
                    out.push_str(&format!("{n} {}\t{}\t{}\n", s.text, key.correct.join(","), ids.join(" ")));
                }
                _ => out.push_str(&format!("{n} {}\n", s.text)),
            }
        }
    }
    out
}
