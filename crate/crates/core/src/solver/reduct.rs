use std::collections::{BTreeSet, VecDeque};

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use crate::logic::{Atom, Program, Rule};

use super::Interpretation;

/// A rule of a positive program. `head == None` stands for ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PositiveRule {
    pub head: Option<Atom>,
    pub body: Vec<Atom>,
}

impl fmt::Display for PositiveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Some(h) => write!(f, "{h}")?,
            None => write!(f, "⊥")?,
        }
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositiveProgram {
    pub rules: Vec<PositiveRule>,
}

impl fmt::Display for PositiveProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeastModel {
    Model(Interpretation),
    Inconsistent,
}

/// The reduct of a ground program with respect to `candidate`.
///
/// Rules blocked by a negative literal are dropped, remaining negative
/// literals are deleted, constraints and choice rules whose bounds are not met
/// by `candidate` get ⊥ as head, and the other choice rules become one rule
/// per head atom that `candidate` makes true.
pub fn reduct(program: &Program, candidate: &Interpretation) -> PositiveProgram {
    let mut out = Vec::new();
    for rule in &program.rules {
        let body = rule.body();
        if body.iter().any(|l| l.negated && candidate.contains(&l.atom)) {
            continue;
        }
        let pos: Vec<Atom> = body.iter().filter(|l| !l.negated).map(|l| l.atom.clone()).collect();
        match rule {
            Rule::Fact(a) => out.push(PositiveRule { head: Some(a.clone()), body: vec![] }),
            Rule::Normal { head, .. } => out.push(PositiveRule { head: Some(head.clone()), body: pos }),
            Rule::Constraint { .. } => out.push(PositiveRule { head: None, body: pos }),
            Rule::Choice { lower, upper, heads, .. } => {
                let n = heads.iter().filter(|h| candidate.contains(h)).count();
                if n < *lower as usize || n > *upper as usize {
                    out.push(PositiveRule { head: None, body: pos });
                } else {
                    let mut seen = BTreeSet::new();
                    for h in heads.iter().filter(|h| candidate.contains(h)) {
                        if seen.insert(h) {
                            out.push(PositiveRule { head: Some(h.clone()), body: pos.clone() });
                        }
                    }
                }
            }
        }
    }
    PositiveProgram { rules: out }
}

/// Least fixpoint of a positive program, or `Inconsistent` when ⊥ is derived.
pub fn least_model(program: &PositiveProgram) -> LeastModel {
    let mut missing: Vec<usize> = program.rules.iter().map(|r| r.body.len()).collect();
    let mut watchers: HashMap<&Atom, Vec<usize>> = HashMap::default();
    for (i, r) in program.rules.iter().enumerate() {
        for a in &r.body {
            watchers.entry(a).or_default().push(i);
        }
    }
    let mut model: BTreeSet<Atom> = BTreeSet::new();
    let mut queue: VecDeque<usize> = (0..program.rules.len()).filter(|&i| missing[i] == 0).collect();
    while let Some(i) = queue.pop_front() {
        let Some(head) = &program.rules[i].head else {
            return LeastModel::Inconsistent;
        };
        if model.insert(head.clone()) {
            for &j in watchers.get(head).into_iter().flatten() {
                // one watcher entry per body occurrence, so repeats count down correctly
                missing[j] -= 1;
                if missing[j] == 0 {
                    queue.push_back(j);
                }
            }
        }
    }
    LeastModel::Model(Interpretation::from_atoms(model))
}
