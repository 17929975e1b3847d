//! Question answering over stories: representation, reasoning, and learning
//! from wrong answers.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bias::{generate_declarations, mode_fluent, BiasConfig, BiasError, ModeDecl, SlotKind, SpaceCache};
use crate::ec::{reify, sdec_background, EcError, EventKind, EventRecord};
use crate::learn::{
    incremental_learn, make_examples, scoped_registry, ExampleSpec, Hypothesis, LearnError, LearnOptions, LearnStep, LearnerState,
};
use crate::logic::{unify, Atom, Program, Rule, Symbol, Term, TypeRegistry};
use crate::nl::{normalize, parse_sentence, FluentRep, Lexicon, NlError, ParserBackend, Sentence, Story, Tag, Wh};
use crate::solver::{answer_sets, entailment, Entailment, SolveError, SolveOptions};

pub use report::{run_task, Report, Verdict};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Nl(#[from] NlError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error(transparent)]
    Ec(#[from] EcError),
    #[error("sentence {0} is not a question with an answer key")]
    NotAQuestion(usize),
    #[error("sentence {index} could not be parsed: {msg}")]
    Unparsed { index: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Maybe,
    Values(Vec<String>),
    Count(usize),
}

const NUMBER_WORDS: [&str; 11] = ["none", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];

impl Answer {
    /// Set comparison with the gold answers; counts also match number words.
    pub fn matches(&self, gold: &[String]) -> bool {
        let gold: BTreeSet<String> = gold.iter().map(|g| g.trim().to_lowercase()).collect();
        let single = |s: &str| gold.len() == 1 && gold.contains(s);
        match self {
            Answer::Yes => single("yes"),
            Answer::No => single("no"),
            Answer::Maybe => single("maybe"),
            Answer::Values(v) if v.is_empty() => single("nothing") || single("none"),
            Answer::Values(v) => v.iter().cloned().collect::<BTreeSet<_>>() == gold,
            Answer::Count(n) => single(&n.to_string()) || NUMBER_WORDS.get(*n).is_some_and(|w| single(w)),
        }
    }

    /// Constants of a value answer.
    pub fn values(&self) -> &[String] {
        match self {
            Answer::Values(v) => v,
            _ => &[],
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes => f.write_str("yes"),
            Answer::No => f.write_str("no"),
            Answer::Maybe => f.write_str("maybe"),
            Answer::Values(v) if v.is_empty() => f.write_str("nothing"),
            Answer::Values(v) => f.write_str(&v.join(",")),
            Answer::Count(n) => write!(f, "{n}"),
        }
    }
}

/// Event-calculus records for parsed statements: "be" statements initiate
/// (or, negated, terminate) their fluent; anything else is an event. A
/// disjunctive parse becomes one choice group.
pub fn event_records(statements: &[(&Sentence, &FluentRep)]) -> Vec<EventRecord> {
    let mut out = Vec::new();
    for (group, (s, rep)) in statements.iter().enumerate() {
        for atom in &rep.atoms {
            let kind = if crate::bias::is_be_predicate(atom.predicate.as_str()) {
                if s.negated {
                    EventKind::TerminatedAt
                } else {
                    EventKind::InitiatedAt
                }
            } else {
                EventKind::HappensAt
            };
            let mut r = EventRecord::new(kind, atom.clone(), s.index as i64);
            if rep.disjunctive && rep.atoms.len() > 1 {
                r.group = Some(group);
            }
            out.push(r);
        }
    }
    out
}

/// The story up to a question as a program. With event calculus, statements
/// are reified at their time points under `time(1..horizon)`; otherwise the
/// fluents are facts. Disjunctions become choice rules either way.
pub fn build_representation(statements: &[(&Sentence, &FluentRep)], horizon: i64, ec: bool) -> Result<Program, EcError> {
    if ec {
        return reify(&event_records(statements), horizon);
    }
    let mut rules = Vec::new();
    for (_, rep) in statements {
        if rep.disjunctive && rep.atoms.len() > 1 {
            rules.push(Rule::Choice { lower: 1, upper: rep.atoms.len() as i64, heads: rep.atoms.clone(), body: vec![] });
        } else {
            rules.extend(rep.atoms.iter().cloned().map(Rule::Fact));
        }
    }
    Ok(Program::new(rules))
}

/// Representation search for yes/no questions, unification search otherwise.
/// A count is the number of bindings found in every answer set.
pub fn answer_question(
    program: &Program,
    question: &Sentence,
    timed: &Atom,
    query_var: Option<&Symbol>,
    opts: &SolveOptions,
) -> Result<Answer, SolveError> {
    let Some(var) = query_var else {
        return Ok(match entailment(program, timed, opts)? {
            Entailment::All => Answer::Yes,
            Entailment::Some => Answer::Maybe,
            Entailment::None => Answer::No,
        });
    };
    let result = answer_sets(program, opts)?;
    if !result.complete {
        return Err(SolveError::BoundExceeded { bound: opts.bound });
    }
    let bindings_in = |set: &crate::solver::Interpretation| -> BTreeSet<String> {
        set.iter().filter_map(|a| unify(timed, a)).filter_map(|b| b.get(var).map(ToString::to_string)).collect()
    };
    if question.wh == Some(Wh::HowMany) {
        let mut sets = result.answer_sets.iter().map(bindings_in);
        let first = sets.next().unwrap_or_default();
        let common = sets.fold(first, |acc, s| acc.intersection(&s).cloned().collect());
        return Ok(Answer::Count(common.len()));
    }
    let all: BTreeSet<String> = result.answer_sets.iter().flat_map(bindings_in).collect();
    Ok(Answer::Values(all.into_iter().collect()))
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub ec: bool,
    pub bias: BiasConfig,
    pub learn: LearnOptions,
    pub seed: u64,
}

impl SessionConfig {
    /// Three variables per rule for plain fluents, four with event calculus
    /// for the extra time variable.
    pub fn new(ec: bool) -> SessionConfig {
        SessionConfig { ec, bias: BiasConfig::with_maxv(if ec { 4 } else { 3 }), learn: LearnOptions::default(), seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionStats {
    pub questions: usize,
    pub correct: usize,
    pub learn_invocations: usize,
    pub relearned: usize,
    pub learn_failures: usize,
    pub learn_time: Duration,
    /// Why the most recent failed learning call failed.
    pub last_learn_error: Option<String>,
}

/// A normalized story with one parse result per sentence.
#[derive(Debug, Clone)]
pub struct ParsedStory {
    pub story: Story,
    pub reps: Vec<Result<FluentRep, String>>,
    pub issues: Vec<String>,
}

/// What one question needs for reasoning and learning.
#[derive(Debug, Clone)]
pub struct QuestionContext {
    pub program: Program,
    pub timed: Atom,
    pub query_var: Option<Symbol>,
    pub has_choice: bool,
    pub registry: TypeRegistry,
}

pub struct Session {
    pub config: SessionConfig,
    lexicon: Lexicon,
    parser: Arc<dyn ParserBackend>,
    types: Arc<TypeRegistry>,
    learner: LearnerState,
    decls: Vec<ModeDecl>,
    constants: BTreeMap<String, BTreeSet<Term>>,
    spaces: Arc<SpaceCache>,
    rng: ChaCha8Rng,
    pub stats: SessionStats,
}

impl Session {
    pub fn new(config: SessionConfig, lexicon: Lexicon, parser: Arc<dyn ParserBackend>, spaces: Arc<SpaceCache>) -> Session {
        let types = Arc::new(lexicon.type_registry());
        let background = if config.ec { sdec_background() } else { Program::default() };
        Session {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            learner: LearnerState::new(background, Arc::clone(&types)),
            config,
            lexicon,
            parser,
            types,
            decls: Vec::new(),
            constants: BTreeMap::new(),
            spaces,
            stats: SessionStats::default(),
        }
    }

    pub fn hypothesis(&self) -> &Hypothesis {
        &self.learner.hypothesis
    }

    pub fn learner(&self) -> &LearnerState {
        &self.learner
    }

    pub fn declarations(&self) -> &[ModeDecl] {
        &self.decls
    }

    pub fn spaces(&self) -> &SpaceCache {
        &self.spaces
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn parse_story(&self, story: &Story) -> ParsedStory {
        let (story, issues) = normalize(story, &self.lexicon);
        let reps =
            story.sentences.iter().map(|s| parse_sentence(self.parser.as_ref(), s, &self.lexicon).map_err(|e| e.to_string())).collect();
        ParsedStory { story, reps, issues: issues.into_iter().map(|i| i.msg).collect() }
    }

    fn prefix<'a>(&self, parsed: &'a ParsedStory, qi: usize) -> Vec<(&'a Sentence, &'a FluentRep)> {
        parsed.story.sentences[..qi]
            .iter()
            .zip(&parsed.reps)
            .filter(|(s, _)| !s.is_question)
            .filter_map(|(s, r)| r.as_ref().ok().map(|r| (s, r)))
            .collect()
    }

    /// Representation, timed question and type facts for question `qi`
    /// (an index into the story's sentences).
    pub fn question_context(&self, parsed: &ParsedStory, qi: usize) -> Result<QuestionContext, PipelineError> {
        let q = &parsed.story.sentences[qi];
        if !q.is_question {
            return Err(PipelineError::NotAQuestion(qi));
        }
        let rep = parsed.reps[qi].as_ref().map_err(|msg| PipelineError::Unparsed { index: qi, msg: msg.clone() })?;
        let statements = self.prefix(parsed, qi);
        let horizon = q.index as i64;
        let program = build_representation(&statements, horizon, self.config.ec)?;
        let atom = rep.atoms[0].clone();
        let timed = if self.config.ec { EventKind::HoldsAt.wrap(&atom, Term::Int(horizon)) } else { atom };
        let has_choice = program.has_choice();
        let registry = scoped_registry(&self.types, program.rules.iter().flat_map(|r| r.atoms()).chain([&timed]));
        Ok(QuestionContext { program, timed, query_var: rep.query_var.clone(), has_choice, registry })
    }

    fn solve_options(&self, registry: &TypeRegistry) -> SolveOptions {
        let mut opts = self.config.learn.solve.clone();
        opts.ground.registry = Some(Arc::new(registry.clone()));
        opts
    }

    /// Answers question `qi` with the current hypothesis.
    pub fn ask(&self, parsed: &ParsedStory, qi: usize) -> Result<Answer, PipelineError> {
        let ctx = self.question_context(parsed, qi)?;
        let mut program = self.learner.program();
        program.extend(&ctx.program);
        let opts = self.solve_options(&ctx.registry);
        Ok(answer_question(&program, &parsed.story.sentences[qi], &ctx.timed, ctx.query_var.as_ref(), &opts)?)
    }

    /// Mode declarations from the story up to and including question `qi`.
    fn story_declarations(&self, parsed: &ParsedStory, qi: usize) -> Result<Vec<ModeDecl>, PipelineError> {
        let mut typed = Vec::new();
        for (s, rep) in parsed.story.sentences[..=qi].iter().zip(&parsed.reps) {
            if s.is_question && !std::ptr::eq(s, &parsed.story.sentences[qi]) {
                continue;
            }
            let Ok(rep) = rep else { continue };
            match mode_fluent(s, rep, &self.lexicon) {
                Ok(f) => typed.push((s.clone(), f)),
                Err(e) if s.is_question => return Err(e.into()),
                Err(e) => log::warn!("{e}"),
            }
        }
        Ok(generate_declarations(&typed, self.config.ec))
    }

    /// Constants harvested from a story for `const` slots.
    fn harvest_constants(&mut self, parsed: &ParsedStory) {
        for rep in parsed.reps.iter().flatten() {
            for a in &rep.atoms {
                for t in &a.args {
                    if let Term::Sym(c) = t {
                        if let Some(tag @ (Tag::Jj | Tag::Tmp)) = self.lexicon.tag(c.as_str()) {
                            self.constants.entry(tag.as_str().to_string()).or_default().insert(t.clone());
                        }
                    }
                }
            }
        }
    }

    fn bias_config(&self) -> BiasConfig {
        let used: BTreeSet<&str> =
            self.decls.iter().flat_map(|d| d.fluent.slots.iter()).filter(|s| s.kind == SlotKind::Const).map(|s| s.ty.as_str()).collect();
        let mut cfg = self.config.bias.clone();
        cfg.constants = self.constants.iter().filter(|(ty, _)| used.contains(ty.as_str())).map(|(k, v)| (k.clone(), v.clone())).collect();
        cfg
    }

    /// A wrong answer for the exclusion set: the reasoner's own wrong value,
    /// else a random non-gold constant of the query type from the story, else
    /// one from the lexicon.
    fn wrong_answer(&mut self, ctx: &QuestionContext, q: &Sentence, gold: &[String], predicted: &Answer) -> Vec<String> {
        if let Some(v) = predicted.values().iter().find(|v| !gold.contains(v)) {
            return vec![v.clone()];
        }
        let ty = match q.wh {
            Some(Wh::Who) => "nnp",
            Some(Wh::Why) => "jj",
            _ => "nn",
        };
        let pick = |pool: Vec<String>, rng: &mut ChaCha8Rng| pool.choose(rng).cloned().into_iter().collect::<Vec<_>>();
        let from_story: Vec<String> = ctx.registry.constants(ty).map(ToString::to_string).filter(|c| !gold.contains(c)).collect();
        if !from_story.is_empty() {
            return pick(from_story, &mut self.rng);
        }
        let from_lexicon: Vec<String> = self.types.constants(ty).map(ToString::to_string).filter(|c| !gold.contains(c)).collect();
        pick(from_lexicon, &mut self.rng)
    }

    /// Learns from a wrong answer to question `qi`.
    pub fn learn_from(&mut self, parsed: &ParsedStory, qi: usize, predicted: &Answer) -> Result<LearnStep, PipelineError> {
        let q = &parsed.story.sentences[qi];
        if q.wh == Some(Wh::HowMany) {
            return Err(LearnError::AggregatesUnsupported.into());
        }
        let gold: Vec<String> = q.answer_key.as_ref().map(|k| k.correct.clone()).ok_or(PipelineError::NotAQuestion(qi))?;
        let ctx = self.question_context(parsed, qi)?;
        for d in self.story_declarations(parsed, qi)? {
            if !self.decls.contains(&d) {
                self.decls.push(d);
            }
        }
        self.harvest_constants(parsed);
        let space = self.spaces.get_or_build(&self.decls, &self.bias_config())?;
        let incorrect = if ctx.query_var.is_some() { self.wrong_answer(&ctx, q, &gold, predicted) } else { vec![] };
        let examples = make_examples(&ExampleSpec {
            id: format!("s{}q{}", parsed.story.id, q.index),
            context: ctx.program.clone(),
            question: &ctx.timed,
            query_var: ctx.query_var.clone(),
            correct: &gold,
            incorrect: &incorrect,
            has_choice: ctx.has_choice,
        });
        let mut step = LearnStep::Covered;
        for e in examples {
            let s = incremental_learn(&mut self.learner, Arc::clone(&space), e, &self.config.learn)?;
            if matches!(s, LearnStep::Relearned(_)) {
                step = s;
            }
        }
        Ok(step)
    }

    /// Answers every question of a training story, learning after each
    /// wrong answer.
    pub fn train_story(&mut self, story: &Story) -> Vec<Verdict> {
        let parsed = self.parse_story(story);
        let mut out = Vec::new();
        for qi in (0..parsed.story.sentences.len()).filter(|&i| parsed.story.sentences[i].is_question) {
            let mut v = self.verdict(&parsed, qi, "train");
            self.stats.questions += 1;
            if v.correct {
                self.stats.correct += 1;
            } else {
                self.stats.learn_invocations += 1;
                let predicted = v.answer.clone().unwrap_or(Answer::Values(vec![]));
                let start = Instant::now();
                match self.learn_from(&parsed, qi, &predicted) {
                    Ok(LearnStep::Relearned(_)) => self.stats.relearned += 1,
                    Ok(LearnStep::Covered) => {}
                    Err(e) => {
                        self.stats.learn_failures += 1;
                        v.learn_error = Some(e.to_string());
                        self.stats.last_learn_error = v.learn_error.clone();
                    }
                }
                self.stats.learn_time += start.elapsed();
                v.learned = true;
            }
            out.push(v);
        }
        out
    }

    /// Answers every question of a story without learning.
    pub fn eval_story(&self, story: &Story) -> Vec<Verdict> {
        let parsed = self.parse_story(story);
        (0..parsed.story.sentences.len())
            .filter(|&i| parsed.story.sentences[i].is_question)
            .map(|qi| self.verdict(&parsed, qi, "test"))
            .collect()
    }

    fn verdict(&self, parsed: &ParsedStory, qi: usize, phase: &str) -> Verdict {
        let q = &parsed.story.sentences[qi];
        let gold = q.answer_key.as_ref().map(|k| k.correct.clone()).unwrap_or_default();
        let (answer, mut error) = match self.ask(parsed, qi) {
            Ok(a) => (Some(a), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let correct = answer.as_ref().is_some_and(|a| a.matches(&gold));
        // Wrong answers the learner could not have fixed say why.
        if !correct && error.is_none() {
            if q.wh == Some(Wh::HowMany) {
                error = Some(PipelineError::from(LearnError::AggregatesUnsupported).to_string());
            } else if let Some(e) = &self.stats.last_learn_error {
                error = Some(format!("unsolved after a failed learning call: {e}"));
            }
        }
        Verdict {
            phase: phase.to_string(),
            story: parsed.story.id,
            question: q.text.clone(),
            predicted: answer.as_ref().map_or_else(|| "error".to_string(), ToString::to_string),
            gold,
            correct,
            answer,
            error,
            learned: false,
            learn_error: None,
        }
    }
}
