//! Answer-set search over an interned ground program.
//!
//! Atoms are split into strongly connected components of the dependency graph
//! and visited bottom-up. Inside a component only its open atoms (choice heads
//! and atoms negated by the component's own rules) are guessed; everything
//! else follows by a least fixpoint. Each complete assignment is then checked
//! against the definition: it must equal the least model of its reduct.

use rustc_hash::FxHashMap as HashMap;
use std::io::Write;
use std::ops::ControlFlow;

use crate::logic::{Atom, Program, Rule};

use super::SolveError;

#[derive(Debug, Clone)]
pub(crate) enum GHead {
    Atom(u32),
    Bottom,
    Choice { lower: u32, upper: u32, atoms: Vec<u32> },
}

#[derive(Debug, Clone)]
pub(crate) struct GRule {
    pub head: GHead,
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

/// Ground program with atoms replaced by dense ids.
#[derive(Debug, Clone, Default)]
pub(crate) struct GProgram {
    pub atoms: Vec<Atom>,
    ids: HashMap<Atom, u32>,
    pub rules: Vec<GRule>,
}

impl GProgram {
    pub fn new(program: &Program) -> GProgram {
        let mut gp = GProgram::default();
        for rule in &program.rules {
            let body = rule.body();
            let pos = body.iter().filter(|l| !l.negated).map(|l| gp.intern(&l.atom)).collect();
            let neg = body.iter().filter(|l| l.negated).map(|l| gp.intern(&l.atom)).collect();
            let head = match rule {
                Rule::Fact(a) | Rule::Normal { head: a, .. } => GHead::Atom(gp.intern(a)),
                Rule::Constraint { .. } => GHead::Bottom,
                Rule::Choice { lower, upper, heads, .. } => {
                    let mut atoms: Vec<u32> = heads.iter().map(|h| gp.intern(h)).collect();
                    atoms.sort_unstable();
                    atoms.dedup();
                    GHead::Choice { lower: (*lower).max(0) as u32, upper: (*upper).clamp(0, u32::MAX as i64) as u32, atoms }
                }
            };
            gp.rules.push(GRule { head, pos, neg });
        }
        gp
    }

    fn intern(&mut self, a: &Atom) -> u32 {
        if let Some(&id) = self.ids.get(a) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(a.clone());
        self.ids.insert(a.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn render(&self, value: &[bool]) -> String {
        let mut names: Vec<String> = (0..self.atoms.len()).filter(|&i| value[i]).map(|i| self.atoms[i].to_string()).collect();
        names.sort();
        format!("{{{}}}", names.join(", "))
    }

    /// The definitional test: `value` is stable iff it equals the least model
    /// of its reduct and that model does not contain ⊥.
    pub fn check_stable(&self, value: &[bool], trace: &mut Tracer<'_>) -> bool {
        let mut reduct: Vec<(Option<u32>, &[u32])> = Vec::new();
        for r in &self.rules {
            if r.neg.iter().any(|&b| value[b as usize]) {
                continue;
            }
            match &r.head {
                GHead::Atom(h) => reduct.push((Some(*h), &r.pos)),
                GHead::Bottom => reduct.push((None, &r.pos)),
                GHead::Choice { lower, upper, atoms } => {
                    let n = atoms.iter().filter(|&&h| value[h as usize]).count() as u32;
                    if n < *lower || n > *upper {
                        reduct.push((None, &r.pos));
                    } else {
                        reduct.extend(atoms.iter().filter(|&&h| value[h as usize]).map(|&h| (Some(h), &r.pos[..])));
                    }
                }
            }
        }
        if trace.enabled() {
            trace.line(format!("candidate {}", self.render(value)));
            for (h, body) in &reduct {
                let head = h.map_or("⊥".to_string(), |h| self.atoms[h as usize].to_string());
                if body.is_empty() {
                    trace.line(format!("  reduct {head}."));
                } else {
                    let b: Vec<String> = body.iter().map(|&a| self.atoms[a as usize].to_string()).collect();
                    trace.line(format!("  reduct {head} :- {}.", b.join(", ")));
                }
            }
        }
        let mut missing: Vec<usize> = reduct.iter().map(|(_, b)| b.len()).collect();
        let mut watch: Vec<Vec<usize>> = vec![Vec::new(); self.atoms.len()];
        for (i, (_, body)) in reduct.iter().enumerate() {
            for &a in body.iter() {
                watch[a as usize].push(i);
            }
        }
        let mut model = vec![false; self.atoms.len()];
        let mut queue: Vec<usize> = (0..reduct.len()).filter(|&i| missing[i] == 0).collect();
        while let Some(i) = queue.pop() {
            let Some(h) = reduct[i].0 else {
                trace.line("  least model inconsistent => rejected".to_string());
                return false;
            };
            let h = h as usize;
            if !model[h] {
                model[h] = true;
                for &j in &watch[h] {
                    missing[j] -= 1;
                    if missing[j] == 0 {
                        queue.push(j);
                    }
                }
            }
        }
        let stable = model == value;
        if trace.enabled() {
            trace.line(format!("  least model {} => {}", self.render(&model), if stable { "stable" } else { "rejected" }));
        }
        stable
    }
}

/// Optional line-oriented debug output.
pub(crate) struct Tracer<'a> {
    out: Option<&'a mut dyn Write>,
}

impl<'a> Tracer<'a> {
    pub fn new(out: Option<&'a mut dyn Write>) -> Self {
        Tracer { out }
    }

    pub fn enabled(&self) -> bool {
        self.out.is_some()
    }

    pub fn line(&mut self, s: String) {
        if let Some(out) = self.out.as_mut() {
            // tracing is best effort; a broken sink must not change results
            let _ = writeln!(out, "{s}");
        }
    }
}

struct Component {
    atoms: Vec<u32>,
    rules: Vec<u32>,
    open: Vec<u32>,
    /// Constraints and choice rules whose atoms are all decided here.
    checks: Vec<u32>,
}

pub(crate) struct Search<'p> {
    gp: &'p GProgram,
    comps: Vec<Component>,
    comp_of: Vec<u32>,
    /// Checks over no atoms at all (e.g. an empty-bodied constraint).
    initial_checks: Vec<u32>,
    /// Position of each atom in its component's open list.
    open_index: Vec<u32>,
}

struct Bounds {
    lo: Vec<bool>,
    hi: Vec<bool>,
}

impl<'p> Search<'p> {
    pub fn new(gp: &'p GProgram) -> Search<'p> {
        let n = gp.len();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        for r in &gp.rules {
            let heads: &[u32] = match &r.head {
                GHead::Atom(h) => std::slice::from_ref(h),
                GHead::Choice { atoms, .. } => atoms,
                GHead::Bottom => &[],
            };
            for &h in heads {
                adj[h as usize].extend(r.pos.iter().chain(&r.neg).copied());
            }
        }
        let sccs = tarjan(&adj);
        let mut comp_of = vec![0u32; n];
        for (ci, scc) in sccs.iter().enumerate() {
            for &a in scc {
                comp_of[a as usize] = ci as u32;
            }
        }
        let mut comps: Vec<Component> =
            sccs.into_iter().map(|atoms| Component { atoms, rules: Vec::new(), open: Vec::new(), checks: Vec::new() }).collect();
        let mut initial_checks = Vec::new();
        for (ri, r) in gp.rules.iter().enumerate() {
            let ri = ri as u32;
            let mut rule_comps: Vec<u32> = match &r.head {
                GHead::Atom(h) => vec![comp_of[*h as usize]],
                GHead::Choice { atoms, .. } => atoms.iter().map(|&h| comp_of[h as usize]).collect(),
                GHead::Bottom => vec![],
            };
            rule_comps.sort_unstable();
            rule_comps.dedup();
            for &c in &rule_comps {
                let comp = &mut comps[c as usize];
                comp.rules.push(ri);
                for &b in &r.neg {
                    if comp_of[b as usize] == c {
                        comp.open.push(b);
                    }
                }
                if let GHead::Choice { atoms, .. } = &r.head {
                    comp.open.extend(atoms.iter().copied().filter(|&h| comp_of[h as usize] == c));
                }
            }
            if matches!(r.head, GHead::Bottom | GHead::Choice { .. }) {
                let mut all = r.pos.iter().chain(&r.neg).copied().collect::<Vec<_>>();
                if let GHead::Choice { atoms, .. } = &r.head {
                    all.extend(atoms);
                }
                match all.iter().map(|&a| comp_of[a as usize]).max() {
                    Some(c) => comps[c as usize].checks.push(ri),
                    None => initial_checks.push(ri),
                }
            }
        }
        let mut open_index = vec![u32::MAX; n];
        for c in &mut comps {
            c.open.sort_unstable();
            c.open.dedup();
            for (j, &a) in c.open.iter().enumerate() {
                open_index[a as usize] = j as u32;
            }
        }
        Search { gp, comps, comp_of, initial_checks, open_index }
    }

    /// Depth-first enumeration of stable models. `on_model` receives each one
    /// and may stop the search.
    pub fn run(
        &self,
        max_open: usize,
        exhaustive_open: usize,
        trace: &mut Tracer<'_>,
        on_model: &mut dyn FnMut(&[bool]) -> ControlFlow<()>,
    ) -> Result<(), SolveError> {
        for c in &self.comps {
            if c.open.len() > max_open {
                return Err(SolveError::TooManyOpenAtoms { open: c.open.len(), limit: max_open });
            }
        }
        let n = self.gp.len();
        let mut value = vec![false; n];
        let mut guess = vec![false; n];
        let mut bounds = Bounds { lo: vec![false; n], hi: vec![false; n] };
        if !self.initial_checks.iter().all(|&r| self.check_ok(r, &value)) {
            trace.line("constraint with empty body => no answer sets".to_string());
            return Ok(());
        }
        // per branching component on the path: its surviving guesses and the next one to try
        let mut stack: Vec<(usize, Vec<Vec<bool>>, usize)> = Vec::new();
        let mut pos = 0usize;
        loop {
            let mut advanced = false;
            if pos == self.comps.len() {
                if self.gp.check_stable(&value, trace) && on_model(&value).is_break() {
                    return Ok(());
                }
            } else {
                let models = self.local_models(pos, exhaustive_open, &mut value, &mut guess, &mut bounds, trace);
                if let Some(first) = models.first() {
                    self.apply(pos, first, &mut value, &mut guess);
                    if models.len() > 1 {
                        stack.push((pos, models, 1));
                    }
                    pos += 1;
                    advanced = true;
                }
            }
            if !advanced {
                loop {
                    let Some((p, models, next)) = stack.last_mut() else {
                        return Ok(());
                    };
                    if *next < models.len() {
                        let (p, model) = (*p, models[*next].clone());
                        *next += 1;
                        self.apply(p, &model, &mut value, &mut guess);
                        pos = p + 1;
                        break;
                    }
                    stack.pop();
                }
            }
        }
    }

    fn apply(&self, pos: usize, model: &[bool], value: &mut [bool], guess: &mut [bool]) {
        for (&a, &g) in self.comps[pos].open.iter().zip(model) {
            guess[a as usize] = g;
        }
        let ok = self.eval(pos, value, guess);
        debug_assert!(ok, "stored local model no longer evaluates");
    }

    /// Every guess over the open atoms of component `pos` that evaluates
    /// consistently, given the decided lower components. Small components are
    /// enumerated mask by mask; larger ones by branching with bound
    /// propagation.
    fn local_models(
        &self,
        pos: usize,
        exhaustive_open: usize,
        value: &mut [bool],
        guess: &mut [bool],
        bounds: &mut Bounds,
        trace: &mut Tracer<'_>,
    ) -> Vec<Vec<bool>> {
        let comp = &self.comps[pos];
        let mut out = Vec::new();
        if comp.open.len() <= exhaustive_open {
            for mask in 0u64..1 << comp.open.len() {
                for (j, &a) in comp.open.iter().enumerate() {
                    guess[a as usize] = mask >> j & 1 == 1;
                }
                if self.eval(pos, value, guess) {
                    out.push(comp.open.iter().map(|&a| guess[a as usize]).collect());
                } else if trace.enabled() && !comp.open.is_empty() {
                    let g: Vec<String> =
                        comp.open.iter().filter(|&&a| guess[a as usize]).map(|&a| self.gp.atoms[a as usize].to_string()).collect();
                    trace.line(format!("  guess {{{}}} at component {pos} rejected", g.join(", ")));
                }
            }
        } else {
            let mut assign = vec![None; comp.open.len()];
            self.branch(pos, &mut assign, value, guess, bounds, &mut out);
            if trace.enabled() {
                trace.line(format!("  component {pos}: {} of {} open atoms' guesses survive", out.len(), comp.open.len()));
            }
        }
        out
    }

    fn branch(
        &self,
        pos: usize,
        assign: &mut [Option<bool>],
        value: &mut [bool],
        guess: &mut [bool],
        bounds: &mut Bounds,
        out: &mut Vec<Vec<bool>>,
    ) {
        if !self.propagate(pos, assign, value, bounds) {
            return;
        }
        match assign.iter().position(Option::is_none) {
            Some(i) => {
                for v in [false, true] {
                    let mut next = assign.to_vec();
                    next[i] = Some(v);
                    self.branch(pos, &mut next, value, guess, bounds, out);
                }
            }
            None => {
                let model: Vec<bool> = assign.iter().map(|v| v == &Some(true)).collect();
                for (&a, &g) in self.comps[pos].open.iter().zip(&model) {
                    guess[a as usize] = g;
                }
                if self.eval(pos, value, guess) {
                    out.push(model);
                }
            }
        }
    }

    /// Narrows a partial guess with the bounds it implies. Every completion's
    /// fixpoint lies between `lo` (negated open atoms count as true unless
    /// guessed false, choice heads as false unless guessed true) and `hi`
    /// (the reverse); a guess must agree with its own fixpoint. False when no
    /// completion can.
    fn propagate(&self, pos: usize, assign: &mut [Option<bool>], value: &[bool], bounds: &mut Bounds) -> bool {
        let comp = &self.comps[pos];
        loop {
            self.fixpoint(pos, assign, value, &mut bounds.lo, true);
            self.fixpoint(pos, assign, value, &mut bounds.hi, false);
            let mut changed = false;
            for (j, &a) in comp.open.iter().enumerate() {
                let (lo, hi) = (bounds.lo[a as usize], bounds.hi[a as usize]);
                match assign[j] {
                    Some(true) if !hi => return false,
                    Some(false) if lo => return false,
                    None if !hi => {
                        assign[j] = Some(false);
                        changed = true;
                    }
                    None if lo => {
                        assign[j] = Some(true);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if comp.checks.iter().any(|&r| self.surely_violated(r, pos, value, bounds)) {
                return false;
            }
            if !changed {
                return true;
            }
        }
    }

    fn fixpoint(&self, pos: usize, assign: &[Option<bool>], value: &[bool], out: &mut [bool], lower: bool) {
        let comp = &self.comps[pos];
        let pos32 = pos as u32;
        let guessed = |a: u32| assign[self.open_index[a as usize] as usize];
        for &a in &comp.atoms {
            out[a as usize] = false;
        }
        loop {
            let mut changed = false;
            for &ri in &comp.rules {
                let r = &self.gp.rules[ri as usize];
                let holds = |b: &u32| {
                    if self.comp_of[*b as usize] == pos32 {
                        out[*b as usize]
                    } else {
                        value[*b as usize]
                    }
                };
                if !r.pos.iter().all(holds) {
                    continue;
                }
                let neg_ok = r.neg.iter().all(|&b| {
                    if self.comp_of[b as usize] == pos32 {
                        if lower {
                            guessed(b) == Some(false)
                        } else {
                            guessed(b) != Some(true)
                        }
                    } else {
                        !value[b as usize]
                    }
                });
                if !neg_ok {
                    continue;
                }
                let mut derive = |h: u32, out: &mut [bool]| {
                    if self.comp_of[h as usize] == pos32 && !out[h as usize] {
                        out[h as usize] = true;
                        changed = true;
                    }
                };
                match &r.head {
                    GHead::Atom(h) => derive(*h, out),
                    GHead::Choice { atoms, .. } => {
                        for &h in atoms.iter().filter(|&&h| self.comp_of[h as usize] == pos32) {
                            let chosen = guessed(h);
                            let take = if lower { chosen == Some(true) } else { chosen != Some(false) };
                            if take {
                                derive(h, out);
                            }
                        }
                    }
                    GHead::Bottom => {}
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn surely_violated(&self, ri: u32, pos: usize, value: &[bool], b: &Bounds) -> bool {
        let r = &self.gp.rules[ri as usize];
        let pos32 = pos as u32;
        let here = |a: u32| self.comp_of[a as usize] == pos32;
        let body = r.pos.iter().all(|&a| if here(a) { b.lo[a as usize] } else { value[a as usize] })
            && r.neg.iter().all(|&a| if here(a) { !b.hi[a as usize] } else { !value[a as usize] });
        if !body {
            return false;
        }
        match &r.head {
            GHead::Bottom => true,
            GHead::Choice { lower, upper, atoms } => {
                let count =
                    |set: &[bool]| atoms.iter().filter(|&&h| if here(h) { set[h as usize] } else { value[h as usize] }).count() as u32;
                count(&b.lo) > *upper || count(&b.hi) < *lower
            }
            GHead::Atom(_) => false,
        }
    }

    /// Computes the atoms of component `pos` from the decided lower components
    /// and the current guess, then verifies the guess and the local checks.
    fn eval(&self, pos: usize, value: &mut [bool], guess: &[bool]) -> bool {
        let comp = &self.comps[pos];
        let pos32 = pos as u32;
        for &a in &comp.atoms {
            value[a as usize] = false;
        }
        loop {
            let mut changed = false;
            for &ri in &comp.rules {
                let r = &self.gp.rules[ri as usize];
                if !r.pos.iter().all(|&b| value[b as usize]) {
                    continue;
                }
                let neg_ok = r.neg.iter().all(|&b| if self.comp_of[b as usize] == pos32 { !guess[b as usize] } else { !value[b as usize] });
                if !neg_ok {
                    continue;
                }
                match &r.head {
                    GHead::Atom(h) => {
                        if self.comp_of[*h as usize] == pos32 && !value[*h as usize] {
                            value[*h as usize] = true;
                            changed = true;
                        }
                    }
                    GHead::Choice { atoms, .. } => {
                        for &h in atoms {
                            let h = h as usize;
                            if self.comp_of[h] == pos32 && guess[h] && !value[h] {
                                value[h] = true;
                                changed = true;
                            }
                        }
                    }
                    GHead::Bottom => {}
                }
            }
            if !changed {
                break;
            }
        }
        comp.open.iter().all(|&a| value[a as usize] == guess[a as usize]) && comp.checks.iter().all(|&r| self.check_ok(r, value))
    }

    fn check_ok(&self, ri: u32, value: &[bool]) -> bool {
        let r = &self.gp.rules[ri as usize];
        let body = r.pos.iter().all(|&b| value[b as usize]) && r.neg.iter().all(|&b| !value[b as usize]);
        match &r.head {
            GHead::Bottom => !body,
            GHead::Choice { lower, upper, atoms } => {
                let n = atoms.iter().filter(|&&h| value[h as usize]).count() as u32;
                !body || (*lower <= n && n <= *upper)
            }
            GHead::Atom(_) => true,
        }
    }
}

/// Exhaustive subset enumeration; the reference strategy for small programs.
pub(crate) fn brute_force(
    gp: &GProgram,
    trace: &mut Tracer<'_>,
    on_model: &mut dyn FnMut(&[bool]) -> ControlFlow<()>,
) -> Result<(), SolveError> {
    let n = gp.len();
    if n > 24 {
        return Err(SolveError::TooManyOpenAtoms { open: n, limit: 24 });
    }
    let mut value = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        for (i, v) in value.iter_mut().enumerate() {
            *v = mask >> i & 1 == 1;
        }
        if gp.check_stable(&value, trace) && on_model(&value).is_break() {
            break;
        }
    }
    Ok(())
}

/// Iterative Tarjan. Components come out dependencies-first because edges
/// point from heads to body atoms.
fn tarjan(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    const UNSEEN: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0u32;
    let mut calls: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        calls.push((root, 0));
        while let Some((v, i)) = calls.last_mut() {
            let v = *v as usize;
            if *i < adj[v].len() {
                let w = adj[v][*i] as usize;
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    calls.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some((u, _)) = calls.last() {
                    let u = *u as usize;
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w as usize == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tarjan_orders_dependencies_first() {
        // 0 -> 1 -> 2 -> 1, 3 isolated
        let adj = vec![vec![1], vec![2], vec![1], vec![]];
        let sccs = tarjan(&adj);
        assert_eq!(sccs, vec![vec![1, 2], vec![0], vec![3]]);
    }
}
