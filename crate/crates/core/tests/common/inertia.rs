//! Event-calculus narratives against a direct simulation of the axioms.

use std::collections::BTreeSet;

use narrasp::ec::{reify, sdec_background, timeline, EventKind, EventRecord};
use narrasp::logic::{Atom, Program, Term};
use narrasp::solver::{answer_sets, Interpretation, SolveOptions};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub const FLUENTS: usize = 3;

pub fn fluent(i: usize) -> Atom {
    Atom::new("be", vec![Term::sym("mary"), Term::sym(["kitchen", "garden", "office"][i])])
}

fn arb_record(horizon: i64) -> impl Strategy<Value = EventRecord> {
    let kind = prop::sample::select(vec![EventKind::InitiatedAt, EventKind::TerminatedAt, EventKind::HoldsAt]);
    (kind, 0..FLUENTS, 1..=horizon).prop_map(|(k, f, t)| EventRecord::new(k, fluent(f), t))
}

pub fn arb_narrative() -> impl Strategy<Value = (i64, Vec<EventRecord>)> {
    (1i64..8).prop_flat_map(|h| (Just(h), prop::collection::vec(arb_record(h), 0..10)))
}

/// Direct simulation of the two axioms: `holds[t]` for t in 1..=horizon+1.
fn simulate(records: &[&EventRecord], f: &Atom, horizon: i64) -> Vec<bool> {
    let has = |k: EventKind, t: i64| records.iter().any(|r| r.kind == k && &r.fluent == f && r.time == t);
    let mut holds = vec![false; horizon as usize + 2];
    for t in 1..=horizon + 1 {
        let carried = t > 1 && (has(EventKind::InitiatedAt, t - 1) || (holds[t as usize - 1] && !has(EventKind::TerminatedAt, t - 1)));
        holds[t as usize] = carried || has(EventKind::HoldsAt, t);
    }
    holds
}

fn solve(records: &[EventRecord], horizon: i64) -> Vec<Interpretation> {
    let mut p: Program = sdec_background();
    p.extend(&reify(records, horizon).unwrap());
    let r = answer_sets(&p, &SolveOptions::default()).unwrap();
    assert!(r.complete);
    r.answer_sets
}

fn check_timeline(set: &Interpretation, chosen: &[&EventRecord], horizon: i64) -> Result<(), TestCaseError> {
    let tl = timeline(set, horizon);
    for i in 0..FLUENTS {
        let f = fluent(i);
        let want = simulate(chosen, &f, horizon);
        for t in 1..=horizon + 1 {
            prop_assert_eq!(tl.holds(&f, t), want[t as usize], "{} at {}", f, t);
        }
    }
    Ok(())
}

pub fn one_model_matching_simulation(h: i64, records: &[EventRecord]) -> Result<(), TestCaseError> {
    let sets = solve(records, h);
    prop_assert_eq!(sets.len(), 1);
    let all: Vec<&EventRecord> = records.iter().collect();
    check_timeline(&sets[0], &all, h)
}

pub fn persistence_without_events(h: i64, records: &[EventRecord]) -> Result<(), TestCaseError> {
    let sets = solve(records, h);
    let tl = timeline(&sets[0], h);
    for i in 0..FLUENTS {
        let f = fluent(i);
        for t in 1..h {
            let touched = records.iter().any(|r| r.fluent == f && (r.time == t || (r.time == t + 1 && r.kind == EventKind::HoldsAt)));
            if !touched {
                prop_assert_eq!(tl.holds(&f, t + 1), tl.holds(&f, t), "{} from {}", f, t);
            }
        }
    }
    Ok(())
}

pub fn empty_start_unless_stated(h: i64, records: &[EventRecord]) -> Result<(), TestCaseError> {
    let sets = solve(records, h);
    let stated: BTreeSet<Atom> = records.iter().filter(|r| r.kind == EventKind::HoldsAt && r.time == 1).map(|r| r.fluent.clone()).collect();
    let tl = timeline(&sets[0], h);
    prop_assert_eq!(tl.at(1), &stated);
    Ok(())
}

pub fn one_model_per_nonempty_choice(h: i64, mut records: Vec<EventRecord>, group: BTreeSet<(usize, i64)>) -> Result<(), TestCaseError> {
    let fixed = records.len();
    let facts: BTreeSet<Atom> = records.iter().map(EventRecord::atom).collect();
    let mut added = BTreeSet::new();
    for (f, t) in group {
        let mut r = EventRecord::new(EventKind::InitiatedAt, fluent(f), t.min(h));
        r.group = Some(0);
        // A member that is already a fact would merge models.
        if !facts.contains(&r.atom()) && added.insert(r.atom()) {
            records.push(r);
        }
    }
    prop_assume!(records.len() > fixed);
    let members = &records[fixed..];
    let sets = solve(&records, h);
    prop_assert_eq!(sets.len(), (1usize << members.len()) - 1);
    for set in &sets {
        let mut chosen: Vec<&EventRecord> = records[..fixed].iter().collect();
        chosen.extend(members.iter().filter(|r| set.contains(&r.atom())));
        check_timeline(set, &chosen, h)?;
    }
    Ok(())
}

pub fn arb_group() -> impl Strategy<Value = BTreeSet<(usize, i64)>> {
    prop::collection::btree_set((0..FLUENTS, 1i64..4), 1..4)
}

/// Every inertia property over `cases` generated narratives.
pub fn run_all(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner
        .run(&arb_narrative(), |(h, r)| {
            one_model_matching_simulation(h, &r)?;
            persistence_without_events(h, &r)?;
            empty_start_unless_stated(h, &r)
        })
        .map_err(|e| e.to_string())?;
    runner.run(&(arb_narrative(), arb_group()), |((h, r), g)| one_model_per_nonempty_choice(h, r, g)).map_err(|e| e.to_string())
}
