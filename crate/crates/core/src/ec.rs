//! Discrete event calculus: the inertia axioms, reification of a narrative
//! into event facts, and reading a timeline back out of an answer set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{parse_program, Atom, Program, Rule, Term};
use crate::solver::Interpretation;

pub const SDEC_AXIOMS: &str = "holdsAt(F,T+1) :- initiatedAt(F,T),time(T).\n\
                               holdsAt(F,T+1) :- holdsAt(F,T), not terminatedAt(F,T),time(T).\n";

/// The two inertia axioms.
pub fn sdec_background() -> Program {
    parse_program(SDEC_AXIOMS).expect("axioms parse")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    HappensAt,
    InitiatedAt,
    TerminatedAt,
    HoldsAt,
}

impl EventKind {
    pub fn predicate(self) -> &'static str {
        match self {
            EventKind::HappensAt => "happensAt",
            EventKind::InitiatedAt => "initiatedAt",
            EventKind::TerminatedAt => "terminatedAt",
            EventKind::HoldsAt => "holdsAt",
        }
    }

    pub fn from_predicate(p: &str) -> Option<EventKind> {
        Some(match p {
            "happensAt" => EventKind::HappensAt,
            "initiatedAt" => EventKind::InitiatedAt,
            "terminatedAt" => EventKind::TerminatedAt,
            "holdsAt" => EventKind::HoldsAt,
            _ => return None,
        })
    }

    /// `kind(fluent, time)`.
    pub fn wrap(self, fluent: &Atom, time: Term) -> Atom {
        Atom::new(self.predicate(), vec![fluent.to_term(), time])
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.predicate())
    }
}

/// One reified sentence. Records sharing a `group` come from one disjunctive
/// sentence and become a single choice rule.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventRecord {
    pub kind: EventKind,
    pub fluent: Atom,
    pub time: i64,
    pub group: Option<usize>,
}

impl EventRecord {
    pub fn new(kind: EventKind, fluent: Atom, time: i64) -> EventRecord {
        EventRecord { kind, fluent, time, group: None }
    }

    pub fn atom(&self) -> Atom {
        self.kind.wrap(&self.fluent, Term::Int(self.time))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EcError {
    #[error("event `{record}` at time {time} is outside 1..{horizon}")]
    TimeOutOfRange { record: String, time: i64, horizon: i64 },
}

/// `time(1..horizon).` followed by one fact per record in order; a group of
/// records becomes `1{..}k.` at the position of its first member.
pub fn reify(records: &[EventRecord], horizon: i64) -> Result<Program, EcError> {
    let mut rules = vec![Rule::Fact(Atom::new("time", vec![Term::Range(1, horizon)]))];
    let mut emitted_groups = BTreeSet::new();
    for r in records {
        if r.time < 1 || r.time > horizon {
            return Err(EcError::TimeOutOfRange { record: r.atom().to_string(), time: r.time, horizon });
        }
        match r.group {
            None => rules.push(Rule::Fact(r.atom())),
            Some(g) => {
                if emitted_groups.insert(g) {
                    let heads: Vec<Atom> = records.iter().filter(|o| o.group == Some(g)).map(EventRecord::atom).collect();
                    let k = heads.len() as i64;
                    rules.push(Rule::Choice { lower: 1, upper: k, heads, body: vec![] });
                }
            }
        }
    }
    Ok(Program::new(rules))
}

/// Which fluents hold at each time point `1..=horizon+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub horizon: i64,
    pub holds: BTreeMap<i64, BTreeSet<Atom>>,
}

impl Timeline {
    pub fn at(&self, t: i64) -> &BTreeSet<Atom> {
        static EMPTY: BTreeSet<Atom> = BTreeSet::new();
        self.holds.get(&t).unwrap_or(&EMPTY)
    }

    pub fn holds(&self, fluent: &Atom, t: i64) -> bool {
        self.at(t).contains(fluent)
    }
}

impl fmt::Display for Timeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, fluents) in &self.holds {
            let names: Vec<String> = fluents.iter().map(ToString::to_string).collect();
            writeln!(f, "{t}: {}", names.join(" "))?;
        }
        Ok(())
    }
}

pub fn timeline(answer_set: &Interpretation, horizon: i64) -> Timeline {
    let mut holds: BTreeMap<i64, BTreeSet<Atom>> = (1..=horizon + 1).map(|t| (t, BTreeSet::new())).collect();
    for a in answer_set.iter() {
        if a.predicate.as_str() != "holdsAt" || a.args.len() != 2 {
            continue;
        }
        if let (Some(fluent), Term::Int(t)) = (Atom::from_term(&a.args[0]), &a.args[1]) {
            if let Some(set) = holds.get_mut(t) {
                set.insert(fluent);
            }
        }
    }
    Timeline { horizon, holds }
}
