//! Sentence to fluent representation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{parse_term, Atom, Symbol, Term};

use super::babi::{Sentence, Wh};
use super::lexicon::{Lexicon, Tag};
use super::NlError;

/// Semantic parse of one sentence. Several atoms either come from a
/// conjunction (all hold) or, when `disjunctive`, from an `or` (at least one
/// holds).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FluentRep {
    pub atoms: Vec<Atom>,
    pub query_var: Option<Symbol>,
    pub disjunctive: bool,
}

impl FluentRep {
    pub fn single(atom: Atom) -> FluentRep {
        let query_var = atom.vars().into_iter().next();
        FluentRep { atoms: vec![atom], query_var, disjunctive: false }
    }

    /// Reads `a`, `a, b` (conjunction) or `{a, b}` (disjunction).
    pub fn parse(text: &str) -> Result<FluentRep, NlError> {
        let t = text.trim().trim_end_matches('.').trim();
        let (inner, disjunctive) = match t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
            Some(inner) => (inner, true),
            None => (t, false),
        };
        let mut atoms = Vec::new();
        for part in split_top_level(inner) {
            let term = parse_term(part.trim()).map_err(|e| NlError::Invalid(format!("`{}` is not an atom: {e}", part.trim())))?;
            let atom = Atom::from_term(&term).ok_or_else(|| NlError::Invalid(format!("`{part}` is not an atom")))?;
            atoms.push(atom);
        }
        if atoms.is_empty() {
            return Err(NlError::Invalid("empty parse".into()));
        }
        let query_var = atoms.iter().flat_map(|a| a.vars()).next();
        Ok(FluentRep { atoms, query_var, disjunctive })
    }

    pub fn map_predicates(mut self, f: impl Fn(&str) -> String) -> FluentRep {
        for a in &mut self.atoms {
            a.predicate = Symbol::new(&f(a.predicate.as_str()));
        }
        self
    }
}

impl fmt::Display for FluentRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.atoms.iter().map(ToString::to_string).collect();
        if self.disjunctive {
            write!(f, "{{{}}}", parts.join(", "))
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

impl Serialize for FluentRep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FluentRep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<FluentRep, D::Error> {
        let text = String::deserialize(d)?;
        FluentRep::parse(&text).map_err(serde::de::Error::custom)
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(&s[start..]);
    }
    out
}

/// Checks a parse against the sentence it came from: a query variable exactly
/// for non-yes/no questions, and only constants or variables as arguments.
pub fn validate_rep(rep: &FluentRep, sentence: &Sentence) -> Result<(), NlError> {
    if rep.atoms.is_empty() {
        return Err(NlError::Invalid("no atoms".into()));
    }
    let wants_var = sentence.is_question && sentence.wh != Some(Wh::YesNo);
    if wants_var != rep.query_var.is_some() {
        return Err(NlError::Invalid(format!(
            "`{rep}`: {} query variable expected for `{}`",
            if wants_var { "a" } else { "no" },
            sentence.text
        )));
    }
    for a in &rep.atoms {
        if a.args.iter().any(|t| !matches!(t, Term::Sym(_) | Term::Int(_) | Term::Var(_))) {
            return Err(NlError::Invalid(format!("`{a}` has a non-constant argument")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub text: String,
    pub parse: String,
}

impl Exemplar {
    pub fn new(text: &str, parse: &str) -> Exemplar {
        Exemplar { text: text.into(), parse: parse.into() }
    }
}

/// The few-shot examples of the fact-extraction prompt.
pub fn default_exemplars() -> Vec<Exemplar> {
    vec![
        Exemplar::new("Mary moved to the bathroom.", "go_to(mary,bathroom)"),
        Exemplar::new("John went to the hallway.", "go_to(john,hallway)"),
        Exemplar::new("Where is Daniel?", "be_in(daniel,V1)"),
    ]
}

pub trait ParserBackend: Send + Sync {
    fn parse(&self, sentence: &Sentence, vocabulary: &[String], exemplars: &[Exemplar]) -> Result<FluentRep, NlError>;
}

/// Parses with the lexicon's predicates and the default exemplars.
pub fn parse_sentence(backend: &dyn ParserBackend, sentence: &Sentence, lexicon: &Lexicon) -> Result<FluentRep, NlError> {
    let rep = backend.parse(sentence, &lexicon.predicates(), &default_exemplars())?;
    let rep = rep.map_predicates(|p| lexicon.canonical_predicate(p).to_string());
    validate_rep(&rep, sentence)?;
    Ok(rep)
}

/// Rule-based parser over a closed lexicon.
#[derive(Debug, Clone)]
pub struct DeterministicParser {
    lexicon: Lexicon,
}

const QUERY_TOKEN: &str = "?V1";
const KEPT_AUX: [&str; 4] = ["is", "are", "was", "were"];
const DROPPED_AUX: [&str; 3] = ["did", "does", "do"];

impl DeterministicParser {
    pub fn new(lexicon: Lexicon) -> DeterministicParser {
        DeterministicParser { lexicon }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn tokens(&self, text: &str) -> Vec<String> {
        let mut words: Vec<String> = Vec::new();
        for raw in text.split_whitespace() {
            let core: String = raw.trim_matches(|c: char| !(c.is_alphanumeric() || c == '\'')).to_lowercase();
            if core.is_empty() {
                continue;
            }
            match core.strip_suffix("n't") {
                Some(stem) if !stem.is_empty() => words.push(stem.to_string()),
                Some(_) => {}
                None => words.push(core),
            }
        }
        // negation is carried by the sentence flag, not the parse
        let negations: Vec<&Vec<String>> = self.lexicon.negations().collect();
        let mut out = Vec::new();
        let mut i = 0;
        'outer: while i < words.len() {
            for n in &negations {
                if words[i..].starts_with(n) {
                    i += n.len();
                    continue 'outer;
                }
            }
            let w = self.lexicon.lemma(&words[i]).to_string();
            if self.lexicon.tag(&w) != Some(Tag::Stop) {
                out.push(w);
            }
            i += 1;
        }
        out
    }

    fn noun_phrase_len(&self, toks: &[String]) -> usize {
        let mut n = 0;
        while n < toks.len() && self.lexicon.tag(&toks[n]).is_some_and(Tag::is_content) {
            n += 1;
            if toks.get(n).map(String::as_str) == Some("and")
                && toks.get(n + 1).is_some_and(|t| self.lexicon.tag(t).is_some_and(Tag::is_content))
            {
                n += 1;
            } else {
                break;
            }
        }
        n
    }

    /// Puts a question into statement order with the query slot marked.
    fn rewrite_question(&self, mut toks: Vec<String>, wh: Wh) -> Vec<String> {
        if wh == Wh::YesNo {
            if let Some(first) = toks.first().cloned() {
                if KEPT_AUX.contains(&first.as_str()) {
                    let np = self.noun_phrase_len(&toks[1..]);
                    let subj: Vec<String> = toks.drain(1..1 + np).collect();
                    toks.splice(0..0, subj);
                } else if DROPPED_AUX.contains(&first.as_str()) {
                    toks.remove(0);
                }
            }
            return toks;
        }
        let drop = if wh == Wh::HowMany { 2 } else { 1 };
        toks.drain(..drop.min(toks.len()));
        if wh == Wh::HowMany && toks.first().is_some_and(|t| self.lexicon.tag(t) == Some(Tag::Nn)) {
            // "how many apples is ..." : the counted noun is not an argument
            toks.remove(0);
        }
        match toks.first().map(String::as_str) {
            Some(aux) if KEPT_AUX.contains(&aux) => {
                let np = self.noun_phrase_len(&toks[1..]);
                let subj: Vec<String> = toks.drain(1..1 + np).collect();
                toks.splice(0..0, subj);
                toks.push(QUERY_TOKEN.into());
            }
            Some(aux) if DROPPED_AUX.contains(&aux) => {
                toks.remove(0);
                toks.push(QUERY_TOKEN.into());
            }
            _ => toks.insert(0, QUERY_TOKEN.into()),
        }
        toks
    }

    fn find_verb(&self, toks: &[String]) -> Option<(usize, usize, String)> {
        let mut best: Option<(usize, usize, String)> = None;
        for start in 0..toks.len() {
            for (phrase, pred) in self.lexicon.verbs() {
                if toks[start..].starts_with(phrase) {
                    let better = match &best {
                        None => true,
                        Some((s, l, _)) => start < *s || (start == *s && phrase.len() > *l),
                    };
                    if better {
                        best = Some((start, phrase.len(), pred.clone()));
                    }
                }
            }
            if best.is_some() {
                break;
            }
        }
        best
    }

    fn term(&self, tok: &str) -> Result<Option<(Term, Tag)>, NlError> {
        if tok == QUERY_TOKEN {
            return Ok(Some((Term::var("V1"), Tag::Nn)));
        }
        match self.lexicon.tag(tok) {
            Some(Tag::Number) => Ok(Some((Term::Int(tok.parse().expect("tagged as number")), Tag::Number))),
            Some(tag) if tag.is_content() => Ok(Some((Term::sym(tok), tag))),
            Some(_) => Ok(None),
            None => Err(NlError::UnknownToken(tok.to_string())),
        }
    }
}

impl ParserBackend for DeterministicParser {
    fn parse(&self, sentence: &Sentence, _vocabulary: &[String], _exemplars: &[Exemplar]) -> Result<FluentRep, NlError> {
        let mut toks = self.tokens(&sentence.text);
        if sentence.is_question {
            toks = self.rewrite_question(toks, sentence.wh.unwrap_or(Wh::YesNo));
        }
        let (vstart, vlen, pred) = self.find_verb(&toks).ok_or_else(|| NlError::NoVerb(sentence.text.clone()))?;
        // subjects: names joined by "and"
        let mut subjects = Vec::new();
        for t in &toks[..vstart] {
            if t == "and" {
                continue;
            }
            if let Some((term, _)) = self.term(t)? {
                subjects.push(term);
            }
        }
        // objects: one slot per content word; "or"/"and" add alternatives to the previous slot
        let mut slots: Vec<Vec<Term>> = Vec::new();
        let mut temporal = Vec::new();
        let mut disjunctive = false;
        let mut joiner = None;
        for t in &toks[vstart + vlen..] {
            if t == "or" || t == "and" {
                disjunctive |= t == "or";
                joiner = Some(t.clone());
                continue;
            }
            let Some((term, tag)) = self.term(t)? else { continue };
            if tag == Tag::Tmp {
                temporal.push(term);
            } else if joiner.take().is_some() && !slots.is_empty() {
                slots.last_mut().expect("nonempty").push(term);
            } else {
                slots.push(vec![term]);
            }
        }
        for t in toks[..vstart].iter().filter(|t| self.lexicon.tag(t) == Some(Tag::Tmp)) {
            temporal.push(Term::sym(t));
        }
        subjects.retain(|s| !temporal.contains(s));
        if subjects.is_empty() {
            return Err(NlError::Invalid(format!("no subject in `{}`", sentence.text)));
        }
        let mut atoms = Vec::new();
        for s in &subjects {
            let mut combos: Vec<Vec<Term>> = vec![vec![s.clone()]];
            for slot in &slots {
                combos = combos
                    .into_iter()
                    .flat_map(|prefix| {
                        slot.iter().map(move |o| {
                            let mut p = prefix.clone();
                            p.push(o.clone());
                            p
                        })
                    })
                    .collect();
            }
            for mut args in combos {
                args.extend(temporal.iter().cloned());
                atoms.push(Atom::new(self.lexicon.canonical_predicate(&pred), args));
            }
        }
        let query_var = atoms.iter().flat_map(|a| a.vars()).next();
        Ok(FluentRep { atoms, query_var, disjunctive })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> FluentRep {
        let p = DeterministicParser::new(Lexicon::default_babi());
        let s = if text.ends_with('?') { Sentence::question(1, text, &["x"]) } else { Sentence::statement(1, text) };
        parse_sentence(&p, &s, p.lexicon()).unwrap()
    }

    #[test]
    fn prompt_examples() {
        assert_eq!(parse("Mary moved to the bathroom.").to_string(), "go_to(mary,bathroom)");
        assert_eq!(parse("John went to the hallway.").to_string(), "go_to(john,hallway)");
        let q = parse("Where is Daniel?");
        assert_eq!(q.to_string(), "be(daniel,V1)");
        assert_eq!(q.query_var, Some(Symbol::new("V1")));
    }

    #[test]
    fn mode_bias_story() {
        assert_eq!(parse("Mary is a mouse.").to_string(), "be(mary,mouse)");
        assert_eq!(parse("Mice are afraid of wolves.").to_string(), "be_afraid_of(mouse,wolf)");
        assert_eq!(parse("What is Mary afraid of?").to_string(), "be_afraid_of(mary,V1)");
        assert_eq!(parse("Jason is thirsty.").to_string(), "be(jason,thirsty)");
        assert_eq!(parse("Why did Jason go to the kitchen?").to_string(), "go_to(jason,kitchen,V1)");
    }

    #[test]
    fn conjunction_and_disjunction() {
        let c = parse("John and Helen went to the store.");
        assert_eq!(c.to_string(), "go_to(john,store), go_to(helen,store)");
        assert!(!c.disjunctive);
        let d = parse("John is in the park or garden.");
        assert_eq!(d.to_string(), "{be(john,park), be(john,garden)}");
        let e = parse("Bill is either in the kitchen or the park.");
        assert_eq!(e.to_string(), "{be(bill,kitchen), be(bill,park)}");
    }

    #[test]
    fn temporal_argument_goes_last() {
        assert_eq!(parse("Yesterday Ana went to the park.").to_string(), "go_to(ana,park,yesterday)");
    }

    #[test]
    fn negated_statement_drops_marker() {
        assert_eq!(parse("Daniel is not in the kitchen.").to_string(), "be(daniel,kitchen)");
        assert_eq!(parse("Mary is no longer in the office.").to_string(), "be(mary,office)");
    }

    #[test]
    fn yes_no_and_other_questions() {
        let q = parse("Is John in the park?");
        assert_eq!(q.to_string(), "be(john,park)");
        assert_eq!(q.query_var, None);
        assert_eq!(parse("Who gave the football to Jeff?").to_string(), "give(V1,football,jeff)");
        assert_eq!(parse("How many objects is Mary carrying?").to_string(), "carry(mary,V1)");
        assert_eq!(parse("Where was the apple before the bathroom?").to_string(), "be_before(apple,bathroom,V1)");
    }

    #[test]
    fn unknown_word_is_an_error() {
        let p = DeterministicParser::new(Lexicon::default_babi());
        let s = Sentence::statement(1, "Zorg went to the kitchen.");
        assert!(matches!(parse_sentence(&p, &s, p.lexicon()), Err(NlError::UnknownToken(t)) if t == "zorg"));
    }

    #[test]
    fn rep_text_round_trip() {
        for text in ["go_to(mary,bathroom)", "{be(john,park), be(john,garden)}", "go_to(john,store), go_to(helen,store)"] {
            assert_eq!(FluentRep::parse(text).unwrap().to_string(), text);
        }
        assert_eq!(FluentRep::parse("be_in(daniel,V1)").unwrap().query_var, Some(Symbol::new("V1")));
        assert!(FluentRep::parse("go_to(mary").is_err());
    }
}
