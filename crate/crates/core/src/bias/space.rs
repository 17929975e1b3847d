//! Hypothesis-space enumeration.
//!
//! A candidate rule has an optional head from a head declaration and up to
//! `max_body` body literals from body declarations, each positive or under
//! negation as failure. Every variable is typed by the slot it fills and gets
//! a guard `t(V)` in the body; guards make every rule safe and are not counted
//! in the cost. Rules are kept once per alpha-equivalence class.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::logic::{parse_program, Atom, Literal, Rule, Symbol, Term};

use super::mode::{ModeDecl, ModeFluent, Placement, Slot, SlotKind};
use super::BiasError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasConfig {
    /// Distinct variables per rule.
    pub maxv: usize,
    /// Body literals per rule, guards excluded.
    pub max_body: usize,
    /// Constants for `const(t)` slots, by type.
    pub constants: BTreeMap<String, BTreeSet<Term>>,
    pub allow_constraints: bool,
    /// Adds head-only `be_x` declarations for every `be_x_of` predicate.
    pub aux_heads: bool,
    /// Enumeration stops with an error once more rules than this are found.
    pub space_cap: usize,
}

impl Default for BiasConfig {
    fn default() -> BiasConfig {
        BiasConfig { maxv: 3, max_body: 3, constants: BTreeMap::new(), allow_constraints: true, aux_heads: false, space_cap: 5_000 }
    }
}

impl BiasConfig {
    pub fn with_maxv(maxv: usize) -> BiasConfig {
        BiasConfig { maxv, ..BiasConfig::default() }
    }

    /// Stable text used for content addressing.
    pub fn fingerprint(&self) -> String {
        let mut s = format!(
            "maxv={} max_body={} constraints={} aux={} cap={}",
            self.maxv, self.max_body, self.allow_constraints, self.aux_heads, self.space_cap
        );
        for (ty, cs) in &self.constants {
            let names: Vec<String> = cs.iter().map(ToString::to_string).collect();
            let _ = write!(s, " {ty}:{}", names.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRule {
    pub id: usize,
    pub rule: Rule,
    pub cost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HypothesisSpace {
    pub rules: Vec<CandidateRule>,
}

impl HypothesisSpace {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&CandidateRule> {
        self.rules.get(id)
    }

    /// Number of rules per cost.
    pub fn cost_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for r in &self.rules {
            *h.entry(r.cost).or_default() += 1;
        }
        h
    }

    /// `cost ~ rule.` lines in id order after a `%` header.
    pub fn to_text(&self, hash: &str) -> String {
        let counts: Vec<String> = self.cost_histogram().iter().map(|(c, n)| format!("cost{c}={n}")).collect();
        let mut out = format!("% space {hash} rules={} {}\n", self.len(), counts.join(" "));
        for r in &self.rules {
            let _ = writeln!(out, "{} ~ {}", r.cost, r.rule);
        }
        out
    }

    /// Reads [`HypothesisSpace::to_text`] output, checking the header's hash
    /// and rule count.
    pub fn from_text(text: &str, hash: &str) -> Result<HypothesisSpace, BiasError> {
        let corrupt = |msg: &str| BiasError::Parse(format!("space file: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| corrupt("empty"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("%") || fields.next() != Some("space") || fields.next() != Some(hash) {
            return Err(corrupt("header does not match"));
        }
        let count: usize = fields
            .next()
            .and_then(|f| f.strip_prefix("rules="))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| corrupt("missing rule count"))?;
        let mut rules = Vec::with_capacity(count);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let (cost, rule) = line.split_once(" ~ ").ok_or_else(|| corrupt("expected `cost ~ rule`"))?;
            let cost: usize = cost.trim().parse().map_err(|_| corrupt("bad cost"))?;
            let p = parse_program(rule).map_err(|e| corrupt(&e.to_string()))?;
            let [rule] = <[Rule; 1]>::try_from(p.rules).map_err(|_| corrupt("one rule per line"))?;
            rules.push(CandidateRule { id: rules.len(), rule, cost });
        }
        if rules.len() != count {
            return Err(corrupt("rule count does not match header"));
        }
        Ok(HypothesisSpace { rules })
    }
}

fn aux_declarations(decls: &[ModeDecl]) -> Vec<ModeDecl> {
    let mut out = Vec::new();
    for d in decls {
        let p = d.fluent.predicate.as_str();
        if let Some(base) = p.strip_suffix("_of").filter(|_| p.starts_with("be_")) {
            let fluent = ModeFluent { predicate: Symbol::new(base), slots: d.fluent.slots.clone() };
            out.push(ModeDecl { placement: Placement::Head, wrapper: d.wrapper, fluent });
        }
    }
    out
}

/// Every rule compatible with the declarations, canonical and deduplicated,
/// with ids assigned in (cost, text) order.
pub fn enumerate_space(decls: &[ModeDecl], config: &BiasConfig) -> Result<HypothesisSpace, BiasError> {
    let mut decls: Vec<ModeDecl> = decls.to_vec();
    if config.aux_heads {
        let aux = aux_declarations(&decls);
        decls.extend(aux);
    }
    let decls: Vec<ModeDecl> = decls.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let heads: Vec<Option<&ModeDecl>> = std::iter::once(None)
        .filter(|_| config.allow_constraints)
        .chain(decls.iter().filter(|d| d.placement == Placement::Head).map(Some))
        .collect();
    let bodies: Vec<(&ModeDecl, bool)> =
        decls.iter().filter(|d| d.placement == Placement::Body).flat_map(|d| [(d, true), (d, false)]).collect();

    let found = AtomicUsize::new(0);
    let overflow = AtomicBool::new(false);
    let parts: Vec<BTreeMap<String, (usize, Rule)>> = heads
        .par_iter()
        .map(|head| {
            let mut local = BTreeMap::new();
            let mut combo = Vec::new();
            body_combos(&bodies, 0, config.max_body, &mut combo, &mut |combo| {
                if overflow.load(Ordering::Relaxed) || (head.is_none() && combo.is_empty()) {
                    return;
                }
                let mut lits: Vec<(&ModeDecl, bool)> = Vec::with_capacity(combo.len() + 1);
                if let Some(h) = head {
                    lits.push((h, true));
                }
                lits.extend(combo.iter().map(|&i| bodies[i]));
                assign_and_collect(head.is_some(), &lits, config, &mut local, &found, &overflow);
            });
            local
        })
        .collect();
    if overflow.load(Ordering::Relaxed) {
        return Err(BiasError::SpaceTooLarge { found: found.load(Ordering::Relaxed), cap: config.space_cap });
    }
    let mut merged: BTreeMap<String, (usize, Rule)> = BTreeMap::new();
    for part in parts {
        merged.extend(part);
    }
    if merged.len() > config.space_cap {
        return Err(BiasError::SpaceTooLarge { found: merged.len(), cap: config.space_cap });
    }
    let mut sorted: Vec<(usize, String, Rule)> = merged.into_iter().map(|(k, (c, r))| (c, k, r)).collect();
    sorted.sort();
    Ok(HypothesisSpace { rules: sorted.into_iter().enumerate().map(|(id, (cost, _, rule))| CandidateRule { id, rule, cost }).collect() })
}

/// Non-decreasing index sequences of length up to `left`.
fn body_combos(items: &[(&ModeDecl, bool)], start: usize, left: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    f(cur);
    if left == 0 {
        return;
    }
    for i in start..items.len() {
        cur.push(i);
        body_combos(items, i, left - 1, cur, f);
        cur.pop();
    }
}

fn assign_and_collect(
    has_head: bool,
    lits: &[(&ModeDecl, bool)],
    config: &BiasConfig,
    out: &mut BTreeMap<String, (usize, Rule)>,
    found: &AtomicUsize,
    overflow: &AtomicBool,
) {
    let slots: Vec<Vec<Slot>> = lits.iter().map(|(d, _)| d.slots()).collect();
    let flat: Vec<&Slot> = slots.iter().flatten().collect();
    let mut values = Vec::with_capacity(flat.len());
    let mut vars: Vec<Symbol> = Vec::new();
    assign(&flat, config, &mut vars, &mut values, &mut |values, vars| {
        if overflow.load(Ordering::Relaxed) {
            return;
        }
        let mut atoms = Vec::with_capacity(lits.len());
        let mut at = 0;
        for ((d, _), s) in lits.iter().zip(&slots) {
            atoms.push(d.instantiate(&values[at..at + s.len()]));
            at += s.len();
        }
        let (head, body_atoms) = if has_head { (Some(atoms[0].clone()), &atoms[1..]) } else { (None, &atoms[..]) };
        let body_lits: Vec<Literal> = body_atoms
            .iter()
            .zip(&lits[usize::from(has_head)..])
            .map(|(a, (_, pos))| if *pos { Literal::pos(a.clone()) } else { Literal::neg(a.clone()) })
            .collect();
        if !well_formed(head.as_ref(), &body_lits) {
            return;
        }
        let (key, rule) = canonical(head, body_lits, vars);
        let cost = lits.len();
        if let std::collections::btree_map::Entry::Vacant(e) = out.entry(key) {
            e.insert((cost, rule));
            if found.fetch_add(1, Ordering::Relaxed) + 1 > config.space_cap {
                overflow.store(true, Ordering::Relaxed);
            }
        }
    });
}

fn assign(slots: &[&Slot], config: &BiasConfig, vars: &mut Vec<Symbol>, values: &mut Vec<Term>, f: &mut dyn FnMut(&[Term], &[Symbol])) {
    let i = values.len();
    if i == slots.len() {
        f(values, vars);
        return;
    }
    let slot = slots[i];
    match slot.kind {
        SlotKind::Var => {
            for v in 0..vars.len() {
                if vars[v] == slot.ty {
                    values.push(var_name(v));
                    assign(slots, config, vars, values, f);
                    values.pop();
                }
            }
            if vars.len() < config.maxv {
                values.push(var_name(vars.len()));
                vars.push(slot.ty.clone());
                assign(slots, config, vars, values, f);
                vars.pop();
                values.pop();
            }
        }
        SlotKind::Const => {
            if let Some(cs) = config.constants.get(slot.ty.as_str()) {
                for c in cs {
                    values.push(c.clone());
                    assign(slots, config, vars, values, f);
                    values.pop();
                }
            }
        }
    }
}

fn var_name(i: usize) -> Term {
    Term::var(&format!("V{}", i + 1))
}

/// No repeated literal, no complementary pair, and the head does not occur in
/// the body.
fn well_formed(head: Option<&Atom>, body: &[Literal]) -> bool {
    for (i, l) in body.iter().enumerate() {
        if head == Some(&l.atom) {
            return false;
        }
        if body[..i].iter().any(|o| o.atom == l.atom) {
            return false;
        }
    }
    true
}

/// Canonical form up to variable renaming and body order: over all body
/// orders, rename variables by first occurrence and keep the smallest text.
/// Guards follow the body in variable order.
type Renamed = (String, Option<Atom>, Vec<Literal>, BTreeMap<Symbol, Symbol>);

fn canonical(head: Option<Atom>, body: Vec<Literal>, var_types: &[Symbol]) -> (String, Rule) {
    let mut best: Option<Renamed> = None;
    for perm in permutations(body.len()) {
        let ordered: Vec<Literal> = perm.iter().map(|&i| body[i].clone()).collect();
        let mut renaming = BTreeMap::new();
        let mut note = |t: &Term| collect_order(t, &mut renaming);
        if let Some(h) = &head {
            h.args.iter().for_each(&mut note);
        }
        for l in &ordered {
            l.atom.args.iter().for_each(&mut note);
        }
        let h2 = head.as_ref().map(|h| rename_atom(h, &renaming));
        let b2: Vec<Literal> = ordered.iter().map(|l| Literal { atom: rename_atom(&l.atom, &renaming), negated: l.negated }).collect();
        let text = render(h2.as_ref(), &b2);
        if best.as_ref().is_none_or(|(t, ..)| text < *t) {
            best = Some((text, h2, b2, renaming));
        }
    }
    let (text, head, mut body, renaming) = best.expect("at least one order");
    let mut guards: Vec<(Symbol, Symbol)> = renaming
        .iter()
        .map(|(old, new)| {
            let idx: usize = old.as_str()[1..].parse().expect("generated variable");
            (new.clone(), var_types[idx - 1].clone())
        })
        .collect();
    guards.sort_by_key(|(v, _)| v.as_str()[1..].parse::<usize>().expect("generated variable"));
    for (v, ty) in guards {
        body.push(Literal::pos(Atom::new(ty.as_str(), vec![Term::Var(v)])));
    }
    let rule = match head {
        Some(h) if body.is_empty() => Rule::Fact(h),
        Some(h) => Rule::Normal { head: h, body },
        None => Rule::Constraint { body },
    };
    (text, rule)
}

fn render(head: Option<&Atom>, body: &[Literal]) -> String {
    let b: Vec<String> = body.iter().map(ToString::to_string).collect();
    format!("{}:-{}", head.map(ToString::to_string).unwrap_or_default(), b.join(";"))
}

fn collect_order(t: &Term, renaming: &mut BTreeMap<Symbol, Symbol>) {
    match t {
        Term::Var(v) => {
            if !renaming.contains_key(v) {
                let n = renaming.len() + 1;
                renaming.insert(v.clone(), Symbol::new(&format!("V{n}")));
            }
        }
        Term::Fn(_, args) => args.iter().for_each(|a| collect_order(a, renaming)),
        _ => {}
    }
}

fn rename_term(t: &Term, renaming: &BTreeMap<Symbol, Symbol>) -> Term {
    match t {
        Term::Var(v) => Term::Var(renaming[v].clone()),
        Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| rename_term(a, renaming)).collect()),
        other => other.clone(),
    }
}

fn rename_atom(a: &Atom, renaming: &BTreeMap<Symbol, Symbol>) -> Atom {
    Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| rename_term(t, renaming)).collect() }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Whether `rule` is in the space the declarations define: head and body
/// literals fit some declaration, each variable has exactly one type and a
/// matching guard, and there are at most `maxv` variables.
pub fn is_compatible(rule: &Rule, decls: &[ModeDecl], config: &BiasConfig) -> bool {
    let (head, body) = match rule {
        Rule::Fact(h) => (Some(h), &[][..]),
        Rule::Normal { head, body } => (Some(head), &body[..]),
        Rule::Constraint { body } => (None, &body[..]),
        Rule::Choice { .. } => return false,
    };
    let mut types: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    let mut guards: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    let fits = |atom: &Atom, placement: Placement, types: &mut BTreeMap<Symbol, Symbol>| {
        decls.iter().filter(|d| d.placement == placement).any(|d| {
            let slots = d.slots();
            let probe: Vec<Term> = (0..slots.len()).map(|i| Term::var(&format!("S{i}"))).collect();
            let Some(b) = crate::logic::unify(&d.instantiate(&probe), atom) else { return false };
            let mut local = types.clone();
            let ok = slots.iter().enumerate().all(|(i, s)| {
                let value = &b[&Symbol::new(&format!("S{i}"))];
                match (s.kind, value) {
                    (SlotKind::Var, Term::Var(v)) => *local.entry(v.clone()).or_insert_with(|| s.ty.clone()) == s.ty,
                    (SlotKind::Const, c) if c.is_ground() => config.constants.get(s.ty.as_str()).is_some_and(|cs| cs.contains(c)),
                    _ => false,
                }
            });
            if ok {
                *types = local;
            }
            ok
        })
    };
    if let Some(h) = head {
        if !fits(h, Placement::Head, &mut types) {
            return false;
        }
    }
    for l in body {
        let a = &l.atom;
        if !l.negated && a.args.len() == 1 {
            if let Term::Var(v) = &a.args[0] {
                if guards.insert(v.clone(), a.predicate.clone()).is_some() {
                    return false;
                }
                continue;
            }
        }
        if !fits(a, Placement::Body, &mut types) {
            return false;
        }
    }
    types.len() <= config.maxv && types == guards
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decls(text: &str) -> Vec<ModeDecl> {
        ModeDecl::parse_all(text).unwrap()
    }

    fn texts(space: &HypothesisSpace) -> BTreeSet<String> {
        space.rules.iter().map(|r| format!("{} ~ {}", r.cost, r.rule)).collect()
    }

    #[test]
    fn propositional_example_has_fourteen_rules() {
        let s = enumerate_space(&decls("#modeh(a). #modeh(b). #modeb(a). #modeb(b)."), &BiasConfig::default()).unwrap();
        let want: BTreeSet<String> = [
            "1 ~ :- a.",
            "1 ~ :- b.",
            "1 ~ b.",
            "1 ~ a.",
            "1 ~ :- not b.",
            "1 ~ :- not a.",
            "2 ~ :- a, b.",
            "2 ~ b :- a.",
            "2 ~ a :- b.",
            "2 ~ :- a, not b.",
            "2 ~ a :- not b.",
            "2 ~ :- b, not a.",
            "2 ~ b :- not a.",
            "2 ~ :- not a, not b.",
        ]
        .into_iter()
        .map(String::from)
        .collect();
        assert_eq!(texts(&s), want);
        assert_eq!(s.cost_histogram(), BTreeMap::from([(1, 6), (2, 8)]));
    }

    #[test]
    fn single_head_without_body() {
        let s = enumerate_space(&decls("#modeh(a)."), &BiasConfig::default()).unwrap();
        assert_eq!(texts(&s), BTreeSet::from(["1 ~ a.".to_string()]));
    }

    fn daniel_decls() -> Vec<ModeDecl> {
        decls(
            "#modeb(happensAt(go_to(var(nnp),var(nn)),var(time))).
             #modeb(holdsAt(be(var(nnp),var(nn)),var(time))).
             #modeh(initiatedAt(be(var(nnp),var(nn)),var(time))).
             #modeh(terminatedAt(be(var(nnp),var(nn)),var(time))).",
        )
    }

    #[test]
    fn daniel_space_contains_initiation_rule() {
        let s = enumerate_space(&daniel_decls(), &BiasConfig::with_maxv(4)).unwrap();
        let want = "initiatedAt(be(V1,V2),V3) :- happensAt(go_to(V1,V2),V3), nnp(V1), nn(V2), time(V3).";
        let r = s.rules.iter().find(|r| r.rule.to_string() == want).expect("rule enumerated");
        assert_eq!(r.cost, 2);
        assert!(s.rules.iter().any(|r| r.rule.to_string() == "terminatedAt(be(V1,V2),V3) :- nnp(V1), nn(V2), time(V3)."));
    }

    #[test]
    fn enumerated_rules_are_compatible_and_distinct() {
        let d = daniel_decls();
        let cfg = BiasConfig::with_maxv(4);
        let s = enumerate_space(&d, &cfg).unwrap();
        let mut seen = BTreeSet::new();
        for r in &s.rules {
            assert!(is_compatible(&r.rule, &d, &cfg), "{}", r.rule);
            assert!(seen.insert(r.rule.to_string()));
        }
    }

    #[test]
    fn alpha_equivalent_bodies_collapse() {
        let d = decls("#modeb(p(var(t))). #modeb(q(var(t))).");
        let s = enumerate_space(&d, &BiasConfig { maxv: 2, max_body: 2, ..BiasConfig::default() }).unwrap();
        // `:- p(V1), q(V2)` and `:- q(V1), p(V2)` are the same rule
        let n = s.rules.iter().filter(|r| r.rule.to_string().starts_with(":- p(V1), q(V2)")).count();
        assert_eq!(n, 1);
        assert!(!s.rules.iter().any(|r| r.rule.to_string().starts_with(":- q(V1), p(V2)")));
    }

    #[test]
    fn const_slots_use_configured_constants() {
        let d = decls("#modeh(be(var(nnp),const(jj))).");
        let mut cfg = BiasConfig::default();
        cfg.constants.insert("jj".into(), [Term::sym("thirsty"), Term::sym("tired")].into());
        let s = enumerate_space(&d, &cfg).unwrap();
        let t: Vec<String> = s.rules.iter().map(|r| r.rule.to_string()).collect();
        assert_eq!(t, ["be(V1,thirsty) :- nnp(V1).", "be(V1,tired) :- nnp(V1)."]);
    }

    #[test]
    fn cap_is_reported() {
        let cfg = BiasConfig { space_cap: 10, ..BiasConfig::with_maxv(4) };
        assert!(matches!(enumerate_space(&daniel_decls(), &cfg), Err(BiasError::SpaceTooLarge { cap: 10, .. })));
    }

    #[test]
    fn constraints_can_be_disabled() {
        let cfg = BiasConfig { allow_constraints: false, ..BiasConfig::default() };
        let s = enumerate_space(&decls("#modeh(a). #modeh(b). #modeb(a). #modeb(b)."), &cfg).unwrap();
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn aux_heads_mirror_of_predicates() {
        let d = decls("#modeb(be_left_of(var(nn),var(nn))).");
        let cfg = BiasConfig { aux_heads: true, max_body: 1, maxv: 2, ..BiasConfig::default() };
        let s = enumerate_space(&d, &cfg).unwrap();
        assert!(s.rules.iter().any(|r| r.rule.to_string() == "be_left(V1,V2) :- be_left_of(V1,V2), nn(V1), nn(V2)."));
    }

    #[test]
    fn text_round_trip() {
        let s = enumerate_space(&daniel_decls(), &BiasConfig::with_maxv(4)).unwrap();
        let text = s.to_text("abc");
        assert_eq!(HypothesisSpace::from_text(&text, "abc").unwrap(), s);
        assert!(HypothesisSpace::from_text(&text, "other").is_err());
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(HypothesisSpace::from_text(&truncated, "abc").is_err());
    }
}
