//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use narrasp::bias::{enumerate_space, BiasConfig, ModeDecl, SpaceCache};
use narrasp::ec::sdec_background;
use narrasp::learn::{Cdpi, LearningTask, PartialInterpretation};
use narrasp::logic::{parse_atom, parse_program, Program, Term, TypeRegistry};
use narrasp::nl::{DeterministicParser, Lexicon};
use narrasp::pipeline::{Session, SessionConfig};

pub const DANIEL_DECLS: &str = "#modeb(happensAt(go_to(var(nnp),var(nn)),var(time))).
#modeb(holdsAt(be(var(nnp),var(nn)),var(time))).
#modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).
#modeh(terminatedAt(be(var(nnp),var(nn)),var(time))).";

/// The carrying narrative with its fluent definitions and the axioms.
pub fn carrying_program() -> Program {
    let mut p = sdec_background();
    p.extend(
        &parse_program(
            "initiatedAt(carry(P,O),T) :- happensAt(got(P,O),T).
             terminatedAt(carry(P,O),T) :- happensAt(drop(P,O),T).
             time(1..7).
             initiatedAt(carry(john,football),1).
             happensAt(go_to(john,kitchen),2).
             happensAt(got(john,apple),3).
             happensAt(go_to(john,park),4).
             happensAt(got(john,baseball),5).
             happensAt(drop(john,football),6).",
        )
        .expect("fixture parses"),
    );
    p
}

/// `k` people each walking through `places` rooms, one move per step.
pub fn walking_program(k: usize, places: usize) -> Program {
    let mut text = String::from(
        "initiatedAt(be(P,L),T) :- happensAt(go_to(P,L),T).
         terminatedAt(be(P,L),T) :- happensAt(go_to(P,M),T), holdsAt(be(P,L),T).\n",
    );
    let steps = k * places;
    text.push_str(&format!("time(1..{steps}).\n"));
    for s in 0..steps {
        text.push_str(&format!("happensAt(go_to(p{},l{}),{}).\n", s % k, s % places, s + 1));
    }
    let mut p = sdec_background();
    p.extend(&parse_program(&text).expect("fixture parses"));
    p
}

pub fn daniel_decls() -> Vec<ModeDecl> {
    ModeDecl::parse_all(DANIEL_DECLS).expect("fixture parses")
}

pub fn daniel_task() -> LearningTask {
    let mut types = TypeRegistry::new();
    types.insert("nnp", Term::sym("daniel"));
    types.insert("nn", Term::sym("kitchen"));
    types.insert("nn", Term::sym("bedroom"));
    let example = Cdpi::positive(
        "daniel",
        PartialInterpretation::new(
            [parse_atom("holdsAt(be(daniel,bedroom),3)").expect("atom")],
            [parse_atom("holdsAt(be(daniel,kitchen),3)").expect("atom")],
        ),
        parse_program("time(1..3). happensAt(go_to(daniel,kitchen),1). happensAt(go_to(daniel,bedroom),2).").expect("fixture parses"),
    );
    LearningTask {
        background: sdec_background(),
        space: Arc::new(enumerate_space(&daniel_decls(), &BiasConfig::with_maxv(4)).expect("space")),
        decls: daniel_decls(),
        examples: vec![example],
        types: Arc::new(types),
    }
}

pub fn session(ec: bool) -> Session {
    let lex = Lexicon::default_babi();
    Session::new(SessionConfig::new(ec), lex.clone(), Arc::new(DeterministicParser::new(lex)), Arc::new(SpaceCache::in_memory()))
}
