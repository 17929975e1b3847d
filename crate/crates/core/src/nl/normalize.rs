//! Coreference and negation preprocessing.
//!
//! Pronouns are replaced with the most recently mentioned actor (singular) or
//! actor group (plural, from `X and Y`). A leading discourse anchor such as
//! "then" is dropped; if the remaining sentence starts without a subject, the
//! previous sentence's subjects are inserted. Negated sentences are flagged.

use super::babi::{Sentence, Story};
use super::lexicon::{Lexicon, PronounNumber, Tag};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizeIssue {
    /// Position of the sentence within the story, from 0.
    pub sentence: usize,
    pub token: String,
    pub msg: String,
}

struct Word {
    core: String,
    lead: String,
    trail: String,
}

fn split_words(text: &str) -> Vec<Word> {
    text.split_whitespace()
        .map(|w| {
            let start = w.find(|c: char| c.is_alphanumeric() || c == '\'').unwrap_or(w.len());
            let end = w.rfind(|c: char| c.is_alphanumeric() || c == '\'').map_or(start, |i| i + 1);
            Word { lead: w[..start].to_string(), core: w[start..end.max(start)].to_string(), trail: w[end.max(start)..].to_string() }
        })
        .collect()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn join(words: &[Word]) -> String {
    let text: Vec<String> = words.iter().map(|w| format!("{}{}{}", w.lead, w.core, w.trail)).collect();
    capitalize(&text.join(" "))
}

/// Whether the sentence contains a negation marker.
pub fn is_negated(text: &str, lexicon: &Lexicon) -> bool {
    let lower: Vec<String> = split_words(text).into_iter().map(|w| w.core.to_lowercase()).collect();
    lexicon.negations().any(|phrase| {
        if phrase.len() == 1 && phrase[0].starts_with("n'") {
            return lower.iter().any(|w| w.ends_with(phrase[0].as_str()));
        }
        lower.windows(phrase.len()).any(|win| win == phrase.as_slice())
    })
}

#[derive(Default)]
struct Referents {
    single: Option<String>,
    group: Option<Vec<String>>,
    subjects: Vec<String>,
}

pub fn normalize(story: &Story, lexicon: &Lexicon) -> (Story, Vec<NormalizeIssue>) {
    let mut refs = Referents::default();
    let mut issues = Vec::new();
    let mut out = story.clone();
    for (si, sentence) in story.sentences.iter().enumerate() {
        let (text, problem) = normalize_sentence(sentence, lexicon, &mut refs);
        let s = &mut out.sentences[si];
        match problem {
            Some(token) => {
                issues.push(NormalizeIssue { sentence: si, msg: format!("no referent for `{token}`"), token });
            }
            None => s.text = text,
        }
        s.negated = is_negated(&s.text, lexicon);
    }
    (out, issues)
}

fn normalize_sentence(sentence: &Sentence, lexicon: &Lexicon, refs: &mut Referents) -> (String, Option<String>) {
    let mut words = split_words(&sentence.text);
    let lower: Vec<String> = words.iter().map(|w| w.core.to_lowercase()).collect();
    let mut anchored = false;
    for anchor in lexicon.anchors() {
        if lower.len() > anchor.len() && lower[..anchor.len()] == anchor[..] {
            words.drain(..anchor.len());
            anchored = true;
            break;
        }
    }
    let mut resolved: Vec<Word> = Vec::with_capacity(words.len());
    let mut problem = None;
    for w in words {
        let lw = w.core.to_lowercase();
        match lexicon.pronoun(&lw) {
            Some(number) => {
                let names = match number {
                    PronounNumber::Singular => refs.single.clone().map(|s| vec![s]),
                    PronounNumber::Plural => refs.group.clone(),
                };
                match names {
                    Some(names) => {
                        let text = names.iter().map(|n| capitalize(n)).collect::<Vec<_>>().join(" and ");
                        resolved.push(Word { core: text, lead: w.lead, trail: w.trail });
                    }
                    None => {
                        problem.get_or_insert(lw);
                        resolved.push(w);
                    }
                }
            }
            None => {
                if lexicon.tag(&lw) == Some(Tag::Nnp) {
                    refs.single = Some(lw);
                }
                resolved.push(w)
            }
        }
    }
    if anchored {
        let starts_with_subject = resolved.first().is_some_and(|w| {
            let first = w.core.split(' ').next().unwrap_or("").to_lowercase();
            lexicon.tag(&first) == Some(Tag::Nnp)
        });
        if !starts_with_subject && !refs.subjects.is_empty() {
            let text = refs.subjects.iter().map(|n| capitalize(n)).collect::<Vec<_>>().join(" and ");
            resolved.insert(0, Word { core: text, lead: String::new(), trail: String::new() });
        }
    }
    let text = join(&resolved);
    if problem.is_none() {
        update_referents(&text, lexicon, refs);
    }
    (text, problem)
}

fn update_referents(text: &str, lexicon: &Lexicon, refs: &mut Referents) {
    let lower: Vec<String> = split_words(text).into_iter().map(|w| w.core.to_lowercase()).collect();
    let is_name = |w: &str| lexicon.tag(w) == Some(Tag::Nnp);
    let mut leading = Vec::new();
    let mut i = 0;
    while i < lower.len() && is_name(&lower[i]) {
        leading.push(lower[i].clone());
        if lower.get(i + 1).map(String::as_str) == Some("and") {
            i += 2;
        } else {
            break;
        }
    }
    if !leading.is_empty() {
        refs.subjects = leading;
    }
    for (i, w) in lower.iter().enumerate() {
        if is_name(w) {
            refs.single = Some(w.clone());
            if i >= 2 && lower[i - 1] == "and" && is_name(&lower[i - 2]) {
                refs.group = Some(vec![lower[i - 2].clone(), w.clone()]);
            }
        }
    }
}
