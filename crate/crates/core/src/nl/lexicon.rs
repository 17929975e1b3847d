//! Closed-vocabulary lexicon: part-of-speech tags, lemmas, verb phrases,
//! pronouns, discourse anchors and negation markers.
//!
//! File format, one entry per line, tab separated, `#` starts a comment:
//!
//! ```text
//! nnp     daniel
//! nn      mice    mouse        (optional third column: lemma)
//! verb    went to go_to
//! pron    she     singular
//! anchor  after that
//! neg     no longer
//! alias   be_in   be
//! ```
//!
//! Tags `stop` and `prep` mark words the parser skips; `tmp` marks temporal
//! adverbs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Term, TypeRegistry};

pub const DEFAULT_LEXICON: &str = include_str!("../../data/babi.lex");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Nnp,
    Nn,
    Jj,
    Number,
    Tmp,
    Stop,
    Prep,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Nnp => "nnp",
            Tag::Nn => "nn",
            Tag::Jj => "jj",
            Tag::Number => "number",
            Tag::Tmp => "tmp",
            Tag::Stop => "stop",
            Tag::Prep => "prep",
        }
    }

    pub fn parse(s: &str) -> Option<Tag> {
        Some(match s {
            "nnp" => Tag::Nnp,
            "nn" => Tag::Nn,
            "jj" => Tag::Jj,
            "number" => Tag::Number,
            "tmp" => Tag::Tmp,
            "stop" => Tag::Stop,
            "prep" => Tag::Prep,
            _ => return None,
        })
    }

    /// Tags of words that become arguments of a fluent.
    pub fn is_content(self) -> bool {
        matches!(self, Tag::Nnp | Tag::Nn | Tag::Jj | Tag::Number | Tag::Tmp)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PronounNumber {
    Singular,
    Plural,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("lexicon line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("unknown word `{0}`")]
    UnknownToken(String),
    #[error("reading lexicon {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    tags: BTreeMap<String, Tag>,
    lemmas: BTreeMap<String, String>,
    /// Verb phrases as word sequences, mapped to predicate names.
    verbs: BTreeMap<Vec<String>, String>,
    pronouns: BTreeMap<String, PronounNumber>,
    anchors: BTreeSet<Vec<String>>,
    negations: BTreeSet<Vec<String>>,
    aliases: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim_end();
            if content.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = content.split('\t').map(str::trim).filter(|c| !c.is_empty()).collect();
            let err = |msg: &str| LexiconError::Format { line, msg: msg.to_string() };
            let words = |s: &str| -> Vec<String> { s.split_whitespace().map(str::to_lowercase).collect() };
            match cols.as_slice() {
                ["verb", phrase, pred] => {
                    lex.verbs.insert(words(phrase), pred.to_string());
                }
                ["pron", token, number] => {
                    let n = match *number {
                        "singular" => PronounNumber::Singular,
                        "plural" => PronounNumber::Plural,
                        _ => return Err(err("pronoun number must be singular or plural")),
                    };
                    lex.pronouns.insert(token.to_lowercase(), n);
                }
                ["anchor", phrase] => {
                    lex.anchors.insert(words(phrase));
                }
                ["neg", phrase] => {
                    lex.negations.insert(words(phrase));
                }
                ["alias", from, to] => {
                    lex.aliases.insert(from.to_string(), to.to_string());
                }
                [tag, token] | [tag, token, _] => {
                    let tag = Tag::parse(tag).ok_or_else(|| err(&format!("unknown tag `{tag}`")))?;
                    let token = token.to_lowercase();
                    if let Some(lemma) = cols.get(2) {
                        lex.lemmas.insert(token.clone(), lemma.to_lowercase());
                    }
                    lex.tags.insert(token, tag);
                }
                _ => return Err(err("expected `tag<TAB>token`")),
            }
        }
        Ok(lex)
    }

    pub fn load(path: &Path) -> Result<Lexicon, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|e| LexiconError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Lexicon::parse(&text)
    }

    /// The lexicon shipped for bAbI-style stories.
    pub fn default_babi() -> Lexicon {
        Lexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn tag(&self, token: &str) -> Option<Tag> {
        if token.parse::<i64>().is_ok() {
            return Some(Tag::Number);
        }
        self.tags.get(token).copied()
    }

    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemmas.get(token).map_or(token, String::as_str)
    }

    pub fn verbs(&self) -> impl Iterator<Item = (&Vec<String>, &String)> {
        self.verbs.iter()
    }

    pub fn pronoun(&self, token: &str) -> Option<PronounNumber> {
        self.pronouns.get(token).copied()
    }

    pub fn anchors(&self) -> impl Iterator<Item = &Vec<String>> {
        self.anchors.iter()
    }

    pub fn negations(&self) -> impl Iterator<Item = &Vec<String>> {
        self.negations.iter()
    }

    /// Canonical predicate name (`be_in` becomes `be` with the default lexicon).
    pub fn canonical_predicate<'a>(&'a self, pred: &'a str) -> &'a str {
        self.aliases.get(pred).map_or(pred, String::as_str)
    }

    /// Predicate names the verb map can produce, sorted and deduplicated.
    pub fn predicates(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.verbs.values().collect();
        set.into_iter().cloned().collect()
    }

    pub fn add(&mut self, tag: Tag, token: &str) {
        self.tags.insert(token.to_lowercase(), tag);
    }

    pub fn add_verb(&mut self, phrase: &str, predicate: &str) {
        self.verbs.insert(phrase.split_whitespace().map(str::to_lowercase).collect(), predicate.to_string());
    }

    /// Content words under their lemma, grouped by tag.
    pub fn constants(&self) -> BTreeMap<Tag, BTreeSet<String>> {
        let mut out: BTreeMap<Tag, BTreeSet<String>> = BTreeMap::new();
        for (token, tag) in &self.tags {
            if tag.is_content() {
                out.entry(*tag).or_default().insert(self.lemma(token).to_string());
            }
        }
        out
    }

    /// Type registry for guard atoms: every content constant under its tag.
    pub fn type_registry(&self) -> TypeRegistry {
        let mut reg = TypeRegistry::new();
        for (tag, consts) in self.constants() {
            if matches!(tag, Tag::Nnp | Tag::Nn | Tag::Jj) {
                for c in consts {
                    reg.insert(tag.as_str(), Term::sym(&c));
                }
            }
        }
        reg
    }
}

/// Part-of-speech tag of a single token; integers are `number`.
pub fn pos_tag(token: &str, lexicon: &Lexicon) -> Result<Tag, LexiconError> {
    let t = token.to_lowercase();
    lexicon.tag(&t).ok_or(LexiconError::UnknownToken(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_from_bundled_lexicon() {
        let lex = Lexicon::default_babi();
        assert_eq!(pos_tag("mary", &lex), Ok(Tag::Nnp));
        assert_eq!(pos_tag("Mary", &lex), Ok(Tag::Nnp));
        assert_eq!(pos_tag("wolf", &lex), Ok(Tag::Nn));
        assert_eq!(pos_tag("thirsty", &lex), Ok(Tag::Jj));
        assert_eq!(pos_tag("3", &lex), Ok(Tag::Number));
        assert_eq!(pos_tag("zyzzyva", &lex), Err(LexiconError::UnknownToken("zyzzyva".into())));
    }

    #[test]
    fn lemmas_and_aliases() {
        let lex = Lexicon::default_babi();
        assert_eq!(lex.lemma("mice"), "mouse");
        assert_eq!(lex.lemma("wolves"), "wolf");
        assert_eq!(lex.canonical_predicate("be_in"), "be");
        assert!(lex.predicates().contains(&"go_to".to_string()));
    }

    #[test]
    fn format_errors_carry_line() {
        assert!(matches!(Lexicon::parse("nnp\tmary\nbogus\tx"), Err(LexiconError::Format { line: 2, .. })));
        assert!(matches!(Lexicon::parse("pron\tit\tdual"), Err(LexiconError::Format { line: 1, .. })));
    }

    #[test]
    fn registry_holds_content_words() {
        let lex = Lexicon::parse("nnp\tmary\nnn\tkitchen\nstop\tthe\n").unwrap();
        let reg = lex.type_registry();
        assert!(reg.contains(&"nnp".into(), &Term::sym("mary")));
        assert!(reg.contains(&"nn".into(), &Term::sym("kitchen")));
        assert_eq!(reg.facts().len(), 2);
    }
}
