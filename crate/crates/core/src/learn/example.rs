//! Examples built from wrongly answered questions.

use std::collections::BTreeSet;
use std::fmt;

use crate::logic::{Atom, Bindings, Program, Symbol, Term};

/// Atoms that must (`inc`) and must not (`exc`) be in an answer set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PartialInterpretation {
    pub inc: BTreeSet<Atom>,
    pub exc: BTreeSet<Atom>,
}

impl PartialInterpretation {
    pub fn new(inc: impl IntoIterator<Item = Atom>, exc: impl IntoIterator<Item = Atom>) -> PartialInterpretation {
        let inc: BTreeSet<Atom> = inc.into_iter().collect();
        let exc: BTreeSet<Atom> = exc.into_iter().filter(|a| !inc.contains(a)).collect();
        PartialInterpretation { inc, exc }
    }

    /// Whether an answer set extends this partial interpretation.
    pub fn extended_by(&self, answer_set: &crate::solver::Interpretation) -> bool {
        self.inc.iter().all(|a| answer_set.contains(a)) && !self.exc.iter().any(|a| answer_set.contains(a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    /// Some answer set must extend the partial interpretation.
    Positive,
    /// No answer set may extend it.
    Negative,
}

/// Context-dependent partial interpretation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cdpi {
    pub id: String,
    pub pi: PartialInterpretation,
    pub context: Program,
    pub polarity: Polarity,
}

impl Cdpi {
    pub fn positive(id: &str, pi: PartialInterpretation, context: Program) -> Cdpi {
        Cdpi { id: id.to_string(), pi, context, polarity: Polarity::Positive }
    }

    pub fn negative(id: &str, pi: PartialInterpretation, context: Program) -> Cdpi {
        Cdpi { id: id.to_string(), pi, context, polarity: Polarity::Negative }
    }

    /// Every atom the example mentions, for scoping type facts.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.context.rules.iter().flat_map(|r| r.atoms()).chain(&self.pi.inc).chain(&self.pi.exc)
    }
}

fn set(atoms: &BTreeSet<Atom>) -> String {
    atoms.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Cdpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.polarity {
            Polarity::Positive => "pos",
            Polarity::Negative => "neg",
        };
        let ctx: Vec<String> = self.context.rules.iter().map(ToString::to_string).collect();
        write!(f, "#{kind}({{{}}},{{{}}},{{{}}}).", set(&self.pi.inc), set(&self.pi.exc), ctx.join(" "))
    }
}

/// What the pipeline knows about a wrongly answered question.
#[derive(Debug, Clone)]
pub struct ExampleSpec<'a> {
    pub id: String,
    /// Reified story up to the question, including `time(1..h).`
    pub context: Program,
    /// The question's timed representation; contains `query_var` unless it
    /// is a yes/no question.
    pub question: &'a Atom,
    pub query_var: Option<Symbol>,
    pub correct: &'a [String],
    pub incorrect: &'a [String],
    /// The story was reified with choice rules.
    pub has_choice: bool,
}

pub fn answer_term(value: &str) -> Term {
    match value.parse::<i64>() {
        Ok(n) => Term::Int(n),
        Err(_) => Term::sym(value),
    }
}

fn answer_atoms(question: &Atom, var: &Symbol, values: &[String]) -> Vec<Atom> {
    values.iter().filter_map(|v| question.substitute(&Bindings::from([(var.clone(), answer_term(v))]))).collect()
}

/// The examples for one wrong answer. Without choice rules a single positive
/// example is made. With choice rules, "maybe" gives a positive example, "yes"
/// a negative one forbidding answer sets without the question, and "no" or a
/// wrong value a negative one forbidding answer sets with it.
pub fn make_examples(spec: &ExampleSpec<'_>) -> Vec<Cdpi> {
    let ctx = spec.context.clone();
    let answer = spec.correct.first().map(|s| s.to_lowercase()).unwrap_or_default();
    let id = spec.id.as_str();
    match (&spec.query_var, spec.has_choice) {
        (None, false) => {
            let q = [spec.question.clone()];
            let pi = if answer == "yes" { PartialInterpretation::new(q, []) } else { PartialInterpretation::new([], q) };
            vec![Cdpi::positive(id, pi, ctx)]
        }
        (None, true) => {
            let q = [spec.question.clone()];
            match answer.as_str() {
                "maybe" => vec![Cdpi::positive(id, PartialInterpretation::new(q, []), ctx)],
                "yes" => vec![Cdpi::negative(id, PartialInterpretation::new([], q), ctx)],
                _ => vec![Cdpi::negative(id, PartialInterpretation::new(q, []), ctx)],
            }
        }
        (Some(var), choice) => {
            let good = answer_atoms(spec.question, var, spec.correct);
            let bad = answer_atoms(spec.question, var, &spec.incorrect[..spec.incorrect.len().min(1)]);
            if bad.is_empty() {
                log::warn!("example {id}: no wrong answer available, exclusion set left empty");
            }
            if choice {
                let mut out = vec![Cdpi::positive(id, PartialInterpretation::new(good, []), ctx.clone())];
                if !bad.is_empty() {
                    out.push(Cdpi::negative(&format!("{id}n"), PartialInterpretation::new(bad, []), ctx));
                }
                out
            } else {
                vec![Cdpi::positive(id, PartialInterpretation::new(good, bad), ctx)]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_atom, parse_program};

    fn daniel_context() -> Program {
        parse_program("time(1..3). happensAt(go_to(daniel,kitchen),1). happensAt(go_to(daniel,bedroom),2).").unwrap()
    }

    #[test]
    fn daniel_example_text() {
        let q = parse_atom("holdsAt(be(daniel,V1),3)").unwrap();
        let spec = ExampleSpec {
            id: "e1".into(),
            context: daniel_context(),
            question: &q,
            query_var: Some(Symbol::new("V1")),
            correct: &["bedroom".into()],
            incorrect: &["kitchen".into()],
            has_choice: false,
        };
        let ex = make_examples(&spec);
        assert_eq!(ex.len(), 1);
        assert_eq!(
            ex[0].to_string(),
            "#pos({holdsAt(be(daniel,bedroom),3)},{holdsAt(be(daniel,kitchen),3)},{time(1..3). \
             happensAt(go_to(daniel,kitchen),1). happensAt(go_to(daniel,bedroom),2).})."
        );
    }

    #[test]
    fn yes_no_without_choice() {
        let q = parse_atom("holdsAt(be(john,park),2)").unwrap();
        let mk = |ans: &str| {
            let correct = [ans.to_string()];
            make_examples(&ExampleSpec {
                id: "e".into(),
                context: Program::default(),
                question: &q,
                query_var: None,
                correct: &correct,
                incorrect: &[],
                has_choice: false,
            })
        };
        let yes = mk("yes");
        assert_eq!(yes[0].polarity, Polarity::Positive);
        assert_eq!(yes[0].pi.inc, BTreeSet::from([q.clone()]));
        assert!(yes[0].pi.exc.is_empty());
        let no = mk("no");
        assert!(no[0].pi.inc.is_empty());
        assert_eq!(no[0].pi.exc, BTreeSet::from([q.clone()]));
    }

    #[test]
    fn choice_story_cases() {
        let q = parse_atom("holdsAt(be_in(john,park),2)").unwrap();
        let ctx = parse_program("time(1..1). 1{initiatedAt(be_in(john,park),1); initiatedAt(be_in(john,garden),1)}2.").unwrap();
        let mk = |ans: &str| {
            let correct = [ans.to_string()];
            make_examples(&ExampleSpec {
                id: "e".into(),
                context: ctx.clone(),
                question: &q,
                query_var: None,
                correct: &correct,
                incorrect: &[],
                has_choice: true,
            })
        };
        let maybe = mk("maybe");
        assert_eq!((maybe[0].polarity, maybe[0].pi.inc.len(), maybe[0].pi.exc.len()), (Polarity::Positive, 1, 0));
        let yes = mk("yes");
        assert_eq!((yes[0].polarity, yes[0].pi.inc.len(), yes[0].pi.exc.len()), (Polarity::Negative, 0, 1));
        let no = mk("no");
        assert_eq!((no[0].polarity, no[0].pi.inc.len(), no[0].pi.exc.len()), (Polarity::Negative, 1, 0));
    }

    #[test]
    fn missing_wrong_answer_leaves_exclusion_empty() {
        let q = parse_atom("holdsAt(be(daniel,V1),3)").unwrap();
        let ex = make_examples(&ExampleSpec {
            id: "e".into(),
            context: daniel_context(),
            question: &q,
            query_var: Some(Symbol::new("V1")),
            correct: &["bedroom".into()],
            incorrect: &[],
            has_choice: false,
        });
        assert!(ex[0].pi.exc.is_empty());
    }
}
