//! Bottom-up grounding.
//!
//! The grounder first computes an over-approximation of the derivable atoms
//! (a fixpoint that ignores negation and choice bounds), then instantiates
//! every non-ground rule by joining its positive body against that set.
//! Instances whose positive body can never hold are never produced. Ground
//! input rules are copied through unchanged, so grounding a ground program is
//! the identity.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};
use std::sync::Arc;

use thiserror::Error;

use super::term::{Atom, Program, Rule, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("grounding exceeded the limit of {limit} {what}")]
    LimitExceeded { limit: usize, what: &'static str },
}

/// Constants per type name. A unary body atom `t(V)` whose predicate is a
/// registered type is answered from the registry instead of from facts, and
/// the registry's `t(c)` facts are added to the ground program.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TypeRegistry {
    types: BTreeMap<Symbol, BTreeSet<Term>>,
}

impl TypeRegistry {
    pub fn new() -> TypeRegistry {
        TypeRegistry::default()
    }

    pub fn insert(&mut self, ty: &str, constant: Term) {
        self.types.entry(Symbol::new(ty)).or_default().insert(constant);
    }

    pub fn merge(&mut self, other: &TypeRegistry) {
        for (ty, consts) in &other.types {
            self.types.entry(ty.clone()).or_default().extend(consts.iter().cloned());
        }
    }

    pub fn constants(&self, ty: &str) -> impl Iterator<Item = &Term> {
        self.types.get(&Symbol::new(ty)).into_iter().flatten()
    }

    pub fn contains(&self, ty: &Symbol, constant: &Term) -> bool {
        self.types.get(ty).is_some_and(|s| s.contains(constant))
    }

    pub fn has_type(&self, ty: &Symbol) -> bool {
        self.types.contains_key(ty)
    }

    pub fn types(&self) -> impl Iterator<Item = (&Symbol, &BTreeSet<Term>)> {
        self.types.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.types.values().all(BTreeSet::is_empty)
    }

    /// The registry as `t(c).` facts.
    pub fn facts(&self) -> Program {
        self.types
            .iter()
            .flat_map(|(ty, consts)| consts.iter().map(move |c| Rule::Fact(Atom { predicate: ty.clone(), args: vec![c.clone()] })))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct GroundOptions {
    pub registry: Option<Arc<TypeRegistry>>,
    pub max_rules: usize,
    pub max_atoms: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { registry: None, max_rules: 2_000_000, max_atoms: 1_000_000 }
    }
}

pub fn ground(program: &Program) -> Result<Program, GroundError> {
    ground_with(program, &GroundOptions::default())
}

pub fn ground_with(program: &Program, opts: &GroundOptions) -> Result<Program, GroundError> {
    Grounder::new(program, opts)?.run()
}

/// Expands interval arguments of a fact into every combination.
pub fn expand_ranges(atom: &Atom) -> Vec<Atom> {
    let mut out = vec![Vec::<Term>::new()];
    for arg in &atom.args {
        let choices: Vec<Term> = match arg {
            Term::Range(lo, hi) => (*lo..=*hi).map(Term::Int).collect(),
            other => vec![other.clone()],
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(|args| Atom { predicate: atom.predicate.clone(), args }).collect()
}

#[derive(Debug, Clone)]
enum Pat {
    Ground(Term),
    Slot(usize),
    Fn(Symbol, Vec<Pat>),
    Add(Box<Pat>, i64),
}

#[derive(Debug, Clone)]
struct CAtom {
    pred: Symbol,
    args: Vec<Pat>,
}

#[derive(Debug)]
struct CRule {
    source: usize,
    /// Positive body literals answered from derivable atoms.
    joins: Vec<CAtom>,
    /// Positive unary literals answered from the type registry.
    typed: Vec<(Symbol, usize)>,
    nslots: usize,
    rule: Rule,
    slot_names: Vec<Symbol>,
    heads: Vec<CAtom>,
}

fn compile_term(t: &Term, names: &mut Vec<Symbol>) -> Pat {
    match t {
        Term::Var(v) => Pat::Slot(match names.iter().position(|n| n == v) {
            Some(i) => i,
            None => {
                names.push(v.clone());
                names.len() - 1
            }
        }),
        Term::Fn(f, args) if !t.is_ground() => Pat::Fn(f.clone(), args.iter().map(|a| compile_term(a, names)).collect()),
        Term::Add(inner, k) => Pat::Add(Box::new(compile_term(inner, names)), *k),
        other => Pat::Ground(other.clone()),
    }
}

fn compile_atom(a: &Atom, names: &mut Vec<Symbol>) -> CAtom {
    CAtom { pred: a.predicate.clone(), args: a.args.iter().map(|t| compile_term(t, names)).collect() }
}

fn match_pat(p: &Pat, g: &Term, slots: &mut [Option<Term>], trail: &mut Vec<usize>) -> bool {
    match p {
        Pat::Ground(t) => t == g,
        Pat::Slot(i) => match &slots[*i] {
            Some(bound) => bound == g,
            None => {
                slots[*i] = Some(g.clone());
                trail.push(*i);
                true
            }
        },
        Pat::Fn(f, args) => match g {
            Term::Fn(gf, gargs) if gf == f && gargs.len() == args.len() => {
                args.iter().zip(gargs).all(|(p, g)| match_pat(p, g, slots, trail))
            }
            _ => false,
        },
        Pat::Add(inner, k) => match g {
            Term::Int(n) => match_pat(inner, &Term::Int(n - k), slots, trail),
            _ => false,
        },
    }
}

fn build_term(p: &Pat, slots: &[Option<Term>]) -> Option<Term> {
    Some(match p {
        Pat::Ground(t) => t.clone(),
        Pat::Slot(i) => slots[*i].clone()?,
        Pat::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| build_term(a, slots)).collect::<Option<_>>()?),
        Pat::Add(inner, k) => match build_term(inner, slots)? {
            Term::Int(n) => Term::Int(n + k),
            _ => return None,
        },
    })
}

fn build_atom(a: &CAtom, slots: &[Option<Term>]) -> Option<Atom> {
    Some(Atom { predicate: a.pred.clone(), args: a.args.iter().map(|p| build_term(p, slots)).collect::<Option<_>>()? })
}

fn pat_slots(p: &Pat, out: &mut Vec<usize>) {
    match p {
        Pat::Slot(i) => out.push(*i),
        Pat::Fn(_, args) => args.iter().for_each(|a| pat_slots(a, out)),
        Pat::Add(inner, _) => pat_slots(inner, out),
        Pat::Ground(_) => {}
    }
}

#[derive(Default)]
struct AtomStore {
    set: HashSet<Atom>,
    by_pred: HashMap<Symbol, Vec<Atom>>,
}

impl AtomStore {
    fn insert(&mut self, atom: Atom) -> bool {
        if self.set.contains(&atom) {
            return false;
        }
        self.by_pred.entry(atom.predicate.clone()).or_default().push(atom.clone());
        self.set.insert(atom);
        true
    }

    fn slice(&self, pred: &Symbol, range: (usize, usize)) -> &[Atom] {
        match self.by_pred.get(pred) {
            Some(v) => &v[range.0.min(v.len())..range.1.min(v.len())],
            None => &[],
        }
    }

    fn len_of(&self, pred: &Symbol) -> usize {
        self.by_pred.get(pred).map_or(0, Vec::len)
    }
}

struct Grounder<'a> {
    program: &'a Program,
    opts: &'a GroundOptions,
    rules: Vec<CRule>,
    store: AtomStore,
}

impl<'a> Grounder<'a> {
    fn new(program: &'a Program, opts: &'a GroundOptions) -> Result<Self, GroundError> {
        let registry = opts.registry.as_deref();
        let mut store = AtomStore::default();
        let mut rules = Vec::new();
        if let Some(reg) = registry {
            for rule in reg.facts().rules {
                if let Rule::Fact(a) = rule {
                    store.insert(a);
                }
            }
        }
        for (idx, rule) in program.rules.iter().enumerate() {
            match rule {
                Rule::Fact(a) => {
                    for a in expand_ranges(a) {
                        store.insert(a);
                    }
                }
                r if r.is_ground() => {
                    for h in r.head_atoms() {
                        store.insert(h.clone());
                    }
                }
                r => rules.push(compile_rule(idx, r, registry)),
            }
            if store.set.len() > opts.max_atoms {
                return Err(GroundError::LimitExceeded { limit: opts.max_atoms, what: "atoms" });
            }
        }
        Ok(Grounder { program, opts, rules, store })
    }

    fn run(mut self) -> Result<Program, GroundError> {
        self.saturate()?;
        let mut out = Program::default();
        if let Some(reg) = self.opts.registry.as_deref() {
            out.extend(&reg.facts());
        }
        let full: HashMap<Symbol, (usize, usize)> = self.store.by_pred.iter().map(|(p, v)| (p.clone(), (0, v.len()))).collect();
        let mut compiled = self.rules.iter().peekable();
        for (idx, rule) in self.program.rules.iter().enumerate() {
            match rule {
                Rule::Fact(a) if a.args.iter().any(Term::has_range) => {
                    out.rules.extend(expand_ranges(a).into_iter().map(Rule::Fact));
                }
                r if r.is_ground() => out.rules.push(r.clone()),
                _ => {
                    let crule = compiled.next().expect("compiled rule for each non-ground rule");
                    debug_assert_eq!(crule.source, idx);
                    let mut seen = HashSet::default();
                    let mut instances = Vec::new();
                    let mut overflow = false;
                    let limit = self.opts.max_rules;
                    let budget = limit.saturating_sub(out.rules.len());
                    join_rule(crule, None, &self.store, &full, self.opts.registry.as_deref(), &mut |slots| {
                        if let Some(inst) = instantiate(crule, slots) {
                            if seen.insert(inst.clone()) {
                                instances.push(inst);
                                if instances.len() > budget {
                                    overflow = true;
                                    return false;
                                }
                            }
                        }
                        true
                    });
                    if overflow {
                        return Err(GroundError::LimitExceeded { limit, what: "ground rules" });
                    }
                    out.rules.extend(instances);
                }
            }
        }
        Ok(out)
    }

    /// Semi-naive fixpoint over rule heads.
    fn saturate(&mut self) -> Result<(), GroundError> {
        let mut prev: HashMap<Symbol, usize> = HashMap::default();
        let mut first = true;
        loop {
            let cur: HashMap<Symbol, usize> = self.store.by_pred.keys().map(|p| (p.clone(), self.store.len_of(p))).collect();
            let mut new_atoms = Vec::new();
            for rule in self.rules.iter().filter(|r| !r.heads.is_empty()) {
                let ranges_full: HashMap<Symbol, (usize, usize)> = cur.iter().map(|(p, n)| (p.clone(), (0, *n))).collect();
                let mut emit = |slots: &[Option<Term>]| {
                    for h in &rule.heads {
                        if let Some(a) = build_atom(h, slots) {
                            if !self.store.set.contains(&a) {
                                new_atoms.push(a);
                            }
                        }
                    }
                    true
                };
                if first || rule.joins.is_empty() {
                    if first {
                        join_rule(rule, None, &self.store, &ranges_full, self.opts.registry.as_deref(), &mut emit);
                    }
                    continue;
                }
                for (i, lit) in rule.joins.iter().enumerate() {
                    let lo = prev.get(&lit.pred).copied().unwrap_or(0);
                    let hi = cur.get(&lit.pred).copied().unwrap_or(0);
                    if lo < hi {
                        join_rule(rule, Some((i, (lo, hi))), &self.store, &ranges_full, self.opts.registry.as_deref(), &mut emit);
                    }
                }
            }
            first = false;
            let mut added = false;
            for a in new_atoms {
                added |= self.store.insert(a);
            }
            if self.store.set.len() > self.opts.max_atoms {
                return Err(GroundError::LimitExceeded { limit: self.opts.max_atoms, what: "atoms" });
            }
            if !added {
                return Ok(());
            }
            prev = cur;
        }
    }
}

fn compile_rule(source: usize, rule: &Rule, registry: Option<&TypeRegistry>) -> CRule {
    let mut names = Vec::new();
    let mut joins = Vec::new();
    let mut typed_atoms = Vec::new();
    for lit in rule.body().iter().filter(|l| !l.negated) {
        let is_typed = registry.is_some_and(|r| r.has_type(&lit.atom.predicate))
            && lit.atom.args.len() == 1
            && matches!(lit.atom.args[0], Term::Var(_));
        if is_typed {
            typed_atoms.push(&lit.atom);
        } else {
            joins.push(compile_atom(&lit.atom, &mut names));
        }
    }
    let typed = typed_atoms
        .into_iter()
        .map(|a| {
            let slot = match compile_term(&a.args[0], &mut names) {
                Pat::Slot(i) => i,
                _ => unreachable!("typed literal has a variable argument"),
            };
            (a.predicate.clone(), slot)
        })
        .collect();
    let heads = rule.head_atoms().into_iter().map(|h| compile_atom(h, &mut names)).collect();
    CRule { source, joins, typed, nslots: names.len(), rule: rule.clone(), slot_names: names, heads }
}

fn instantiate(rule: &CRule, slots: &[Option<Term>]) -> Option<Rule> {
    let bindings = rule.slot_names.iter().zip(slots).filter_map(|(n, v)| v.clone().map(|v| (n.clone(), v))).collect();
    let inst = rule.rule.substitute(&bindings)?;
    inst.is_ground().then_some(inst)
}

/// Enumerates all bindings satisfying the positive body of `rule`.
/// `delta` pins one join literal to a sub-range of its predicate's atoms.
/// The callback returns `false` to stop early.
fn join_rule(
    rule: &CRule,
    delta: Option<(usize, (usize, usize))>,
    store: &AtomStore,
    full: &HashMap<Symbol, (usize, usize)>,
    registry: Option<&TypeRegistry>,
    on_match: &mut dyn FnMut(&[Option<Term>]) -> bool,
) {
    let mut order: Vec<usize> = Vec::with_capacity(rule.joins.len());
    if let Some((i, _)) = delta {
        order.push(i);
    }
    let mut bound = vec![false; rule.nslots];
    for &i in &order {
        mark_bound(&rule.joins[i], &mut bound);
    }
    let mut remaining: Vec<usize> = (0..rule.joins.len()).filter(|i| !order.contains(i)).collect();
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .max_by_key(|(_, &i)| {
                let mut s = Vec::new();
                rule.joins[i].args.iter().for_each(|p| pat_slots(p, &mut s));
                let b = s.iter().filter(|&&x| bound[x]).count();
                (b, std::cmp::Reverse(s.len() - b), std::cmp::Reverse(i))
            })
            .unwrap();
        let i = remaining.remove(pos);
        mark_bound(&rule.joins[i], &mut bound);
        order.push(i);
    }
    let mut slots = vec![None; rule.nslots];
    let mut trail = Vec::new();
    let ctx = JoinCtx { rule, order: &order, delta, store, full, registry };
    ctx.step(0, &mut slots, &mut trail, on_match);
}

fn mark_bound(a: &CAtom, bound: &mut [bool]) {
    let mut s = Vec::new();
    a.args.iter().for_each(|p| pat_slots(p, &mut s));
    for x in s {
        bound[x] = true;
    }
}

struct JoinCtx<'a> {
    rule: &'a CRule,
    order: &'a [usize],
    delta: Option<(usize, (usize, usize))>,
    store: &'a AtomStore,
    full: &'a HashMap<Symbol, (usize, usize)>,
    registry: Option<&'a TypeRegistry>,
}

impl JoinCtx<'_> {
    fn step(
        &self,
        k: usize,
        slots: &mut Vec<Option<Term>>,
        trail: &mut Vec<usize>,
        on_match: &mut dyn FnMut(&[Option<Term>]) -> bool,
    ) -> bool {
        if k == self.order.len() {
            return self.typed_step(0, slots, on_match);
        }
        let li = self.order[k];
        let lit = &self.rule.joins[li];
        let range = match self.delta {
            Some((d, r)) if d == li => r,
            _ => self.full.get(&lit.pred).copied().unwrap_or((0, 0)),
        };
        for atom in self.store.slice(&lit.pred, range) {
            if atom.args.len() != lit.args.len() {
                continue;
            }
            let mark = trail.len();
            let ok = lit.args.iter().zip(&atom.args).all(|(p, g)| match_pat(p, g, slots, trail));
            if ok && !self.step(k + 1, slots, trail, on_match) {
                return false;
            }
            for i in trail.drain(mark..) {
                slots[i] = None;
            }
        }
        true
    }

    fn typed_step(&self, k: usize, slots: &mut Vec<Option<Term>>, on_match: &mut dyn FnMut(&[Option<Term>]) -> bool) -> bool {
        let Some((ty, slot)) = self.rule.typed.get(k) else {
            return on_match(slots);
        };
        let registry = self.registry.expect("typed literals only compiled with a registry");
        match slots[*slot].clone() {
            Some(value) => {
                if registry.contains(ty, &value) {
                    return self.typed_step(k + 1, slots, on_match);
                }
                true
            }
            None => {
                for c in registry.constants(ty.as_str()) {
                    slots[*slot] = Some(c.clone());
                    if !self.typed_step(k + 1, slots, on_match) {
                        slots[*slot] = None;
                        return false;
                    }
                }
                slots[*slot] = None;
                true
            }
        }
    }
}
