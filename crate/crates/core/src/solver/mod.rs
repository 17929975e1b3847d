//! Stable-model semantics for the supported dialect: reduct, least model,
//! answer-set enumeration and brave/cautious entailment.

mod reduct;
mod search;

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{ground_with, Atom, GroundError, GroundOptions, Program};

pub use reduct::{least_model, reduct, LeastModel, PositiveProgram, PositiveRule};

use search::{brute_force, GProgram, Search, Tracer};

/// A set of ground atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation(BTreeSet<Atom>);

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Interpretation {
        Interpretation(atoms.into_iter().collect())
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Atom strings in sorted order; the key for canonical ordering.
    pub fn sorted_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.0.iter().map(Atom::to_string).collect();
        v.sort();
        v
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.sorted_strings().join(", "))
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation::from_atoms(iter)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub answer_sets: Vec<Interpretation>,
    /// False when the enumeration bound cut the search short.
    pub complete: bool,
}

impl SolveResult {
    pub fn is_unsatisfiable(&self) -> bool {
        self.complete && self.answer_sets.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entailment {
    All,
    Some,
    None,
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entailment::All => "all",
            Entailment::Some => "some",
            Entailment::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Exhaustive subsets below `brute_force_below` atoms, component search above.
    Auto,
    Search,
    BruteForce,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub bound: usize,
    pub strategy: Strategy,
    pub brute_force_below: usize,
    /// Largest number of guessed atoms allowed in one component.
    pub max_open: usize,
    /// Components with more open atoms than this are searched with bound
    /// propagation instead of trying every guess.
    pub exhaustive_open: usize,
    pub ground: GroundOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            bound: 10_000,
            strategy: Strategy::Auto,
            brute_force_below: 6,
            max_open: 22,
            exhaustive_open: 6,
            ground: GroundOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("{open} atoms must be guessed together, more than the limit of {limit}")]
    TooManyOpenAtoms { open: usize, limit: usize },
    #[error("more than {bound} answer sets")]
    BoundExceeded { bound: usize },
}

fn prepare(program: &Program, opts: &SolveOptions) -> Result<GProgram, SolveError> {
    if program.is_ground() && opts.ground.registry.is_none() {
        Ok(GProgram::new(program))
    } else {
        Ok(GProgram::new(&ground_with(program, &opts.ground)?))
    }
}

fn enumerate(
    program: &Program,
    opts: &SolveOptions,
    trace: Option<&mut dyn Write>,
    on_model: &mut dyn FnMut(&GProgram, &[bool]) -> ControlFlow<()>,
) -> Result<(), SolveError> {
    let gp = prepare(program, opts)?;
    let mut tracer = Tracer::new(trace);
    let brute = match opts.strategy {
        Strategy::BruteForce => true,
        Strategy::Search => false,
        Strategy::Auto => gp.len() < opts.brute_force_below,
    };
    let mut cb = |v: &[bool]| on_model(&gp, v);
    if brute {
        brute_force(&gp, &mut tracer, &mut cb)
    } else {
        Search::new(&gp).run(opts.max_open, opts.exhaustive_open, &mut tracer, &mut cb)
    }
}

fn to_interpretation(gp: &GProgram, value: &[bool]) -> Interpretation {
    gp.atoms.iter().zip(value).filter(|(_, &v)| v).map(|(a, _)| a.clone()).collect()
}

fn collect(program: &Program, opts: &SolveOptions, trace: Option<&mut dyn Write>) -> Result<SolveResult, SolveError> {
    let mut found = Vec::new();
    let mut complete = true;
    enumerate(program, opts, trace, &mut |gp, v| {
        if found.len() == opts.bound {
            complete = false;
            return ControlFlow::Break(());
        }
        found.push(to_interpretation(gp, v));
        ControlFlow::Continue(())
    })?;
    let mut keyed: Vec<(Vec<String>, Interpretation)> = found.into_iter().map(|i| (i.sorted_strings(), i)).collect();
    keyed.sort();
    keyed.dedup_by(|a, b| a.0 == b.0);
    Ok(SolveResult { answer_sets: keyed.into_iter().map(|(_, i)| i).collect(), complete })
}

/// All answer sets, in canonical order (lexicographic over sorted atom
/// strings). Non-ground programs are grounded first.
pub fn answer_sets(program: &Program, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    collect(program, opts, None)
}

/// [`answer_sets`] with a line-oriented trace of every candidate's reduct and
/// model check written to `out`.
pub fn answer_sets_traced(program: &Program, opts: &SolveOptions, out: &mut dyn Write) -> Result<SolveResult, SolveError> {
    collect(program, opts, Some(out))
}

/// Some answer set if one exists. Stops at the first model found.
pub fn first_answer_set(program: &Program, opts: &SolveOptions) -> Result<Option<Interpretation>, SolveError> {
    let mut found = None;
    enumerate(program, opts, None, &mut |gp, v| {
        found = Some(to_interpretation(gp, v));
        ControlFlow::Break(())
    })?;
    Ok(found)
}

/// The first answer set (in search order) satisfying `pred`. Fails with
/// [`SolveError::BoundExceeded`] when `bound` answer sets were rejected.
pub fn find_answer_set(
    program: &Program,
    opts: &SolveOptions,
    pred: &mut dyn FnMut(&Interpretation) -> bool,
) -> Result<Option<Interpretation>, SolveError> {
    let mut found = None;
    let mut seen = 0usize;
    enumerate(program, opts, None, &mut |gp, v| {
        seen += 1;
        if seen > opts.bound {
            return ControlFlow::Break(());
        }
        let i = to_interpretation(gp, v);
        if pred(&i) {
            found = Some(i);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if found.is_none() && seen > opts.bound {
        return Err(SolveError::BoundExceeded { bound: opts.bound });
    }
    Ok(found)
}

/// Whether `query` is in every, some or no answer set. An unsatisfiable
/// program entails nothing.
pub fn entailment(program: &Program, query: &Atom, opts: &SolveOptions) -> Result<Entailment, SolveError> {
    let (mut with, mut without, mut count) = (false, false, 0usize);
    let mut exceeded = false;
    enumerate(program, opts, None, &mut |gp, v| {
        count += 1;
        if count > opts.bound {
            exceeded = true;
            return ControlFlow::Break(());
        }
        let holds = gp.atoms.iter().zip(v).any(|(a, &t)| t && a == query);
        if holds {
            with = true;
        } else {
            without = true;
        }
        if with && without {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if with && without {
        return Ok(Entailment::Some);
    }
    if exceeded {
        return Err(SolveError::BoundExceeded { bound: opts.bound });
    }
    Ok(if with { Entailment::All } else { Entailment::None })
}

/// Entailment from an already computed result.
pub fn entailment_in(result: &SolveResult, query: &Atom) -> Result<Entailment, SolveError> {
    let n = result.answer_sets.iter().filter(|i| i.contains(query)).count();
    if n > 0 && n < result.answer_sets.len() {
        return Ok(Entailment::Some);
    }
    if !result.complete {
        return Err(SolveError::BoundExceeded { bound: result.answer_sets.len() });
    }
    Ok(if n > 0 { Entailment::All } else { Entailment::None })
}
