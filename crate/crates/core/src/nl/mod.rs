//! Natural-language front end: story loading, coreference, and semantic
//! parsing of sentences into fluents.

pub mod babi;
pub mod cache;
pub mod lexicon;
pub mod normalize;
pub mod parse;
pub mod remote;

use thiserror::Error;

pub use babi::{load_babi, parse_babi, write_babi, AnswerKey, BabiError, Sentence, Story, Wh};
pub use cache::{CacheStats, CachedParser, ParseCache};
pub use lexicon::{pos_tag, Lexicon, LexiconError, PronounNumber, Tag};
pub use normalize::{is_negated, normalize, NormalizeIssue};
pub use parse::{default_exemplars, parse_sentence, validate_rep, DeterministicParser, Exemplar, FluentRep, ParserBackend};
pub use remote::{render_prompt, HttpParser};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NlError {
    #[error("unknown word `{0}`")]
    UnknownToken(String),
    #[error("no verb found in `{0}`")]
    NoVerb(String),
    #[error("invalid parse: {0}")]
    Invalid(String),
    #[error("parser service: {0}")]
    Remote(String),
    #[error("parse cache: {0}")]
    Io(String),
}
