//! Laws of one-sided unification.

use std::collections::BTreeSet;

use narrasp::logic::{unify, Atom, Bindings, Symbol, Term};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

pub const CONSTS: [&str; 3] = ["a", "b", "c"];
pub const VARS: [&str; 3] = ["X", "Y", "Z"];

fn arb_ground_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![(0..CONSTS.len()).prop_map(|i| Term::sym(CONSTS[i])), (-3i64..20).prop_map(Term::Int),];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner, 1..3)).prop_map(|(f, args)| Term::func(f, args))
    })
}

fn arb_pattern_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        2 => (0..CONSTS.len()).prop_map(|i| Term::sym(CONSTS[i])),
        3 => (0..VARS.len()).prop_map(|i| Term::var(VARS[i])),
        1 => (0..VARS.len(), 1i64..3).prop_map(|(i, k)| Term::Add(Box::new(Term::var(VARS[i])), k)),
        1 => (0i64..5).prop_map(Term::Int),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner, 1..3)).prop_map(|(f, args)| Term::func(f, args))
    })
}

pub fn arb_pattern() -> impl Strategy<Value = Atom> {
    (prop::sample::select(vec!["p", "q"]), prop::collection::vec(arb_pattern_term(), 0..3))
        .prop_map(|(p, args)| Atom::new(&format!("{p}{}", args.len()), args))
}

pub fn arb_ground_atom() -> impl Strategy<Value = Atom> {
    (prop::sample::select(vec!["p", "q"]), prop::collection::vec(arb_ground_term(), 0..3))
        .prop_map(|(p, args)| Atom::new(&format!("{p}{}", args.len()), args))
}

pub fn arb_values() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(0i64..10, VARS.len())
}

/// A unifier, when one exists, turns the pattern into the ground atom.
pub fn unifier_instantiates(pat: &Atom, g: &Atom) -> Result<(), TestCaseError> {
    if let Some(b) = unify(pat, g) {
        prop_assert_eq!(pat.substitute(&b), Some(g.clone()));
    }
    Ok(())
}

/// Every instance unifies back with exactly the substitution that made it.
pub fn instance_unifies(pat: &Atom, values: &[i64]) -> Result<(), TestCaseError> {
    let theta: Bindings = VARS.iter().zip(values).map(|(v, n)| (Symbol::new(v), Term::Int(*n))).collect();
    let inst = pat.substitute(&theta).unwrap();
    let b = unify(pat, &inst).expect("instance unifies");
    for (v, t) in &b {
        prop_assert_eq!(theta.get(v), Some(t));
    }
    prop_assert_eq!(b.keys().cloned().collect::<BTreeSet<_>>(), pat.vars());
    Ok(())
}

pub fn ground_only_self(a: &Atom, b: &Atom) -> Result<(), TestCaseError> {
    prop_assert_eq!(unify(a, a), Some(Bindings::new()));
    prop_assert_eq!(unify(a, b).is_some(), a == b);
    Ok(())
}

pub fn run_all(cases: u32) -> Result<(), String> {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner
        .run(&(arb_pattern(), arb_ground_atom(), arb_values(), arb_ground_atom()), |(pat, g, values, other)| {
            unifier_instantiates(&pat, &g)?;
            instance_unifies(&pat, &values)?;
            ground_only_self(&g, &other)
        })
        .map_err(|e| e.to_string())
}
