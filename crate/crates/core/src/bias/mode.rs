//! Mode-bias fluents and mode declarations.

use std::collections::BTreeSet;
use std::fmt;

use crate::ec::EventKind;
use crate::logic::{parse_term, Atom, Symbol, Term};
use crate::nl::{FluentRep, Lexicon, Sentence, Tag, Wh};

use super::BiasError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SlotKind {
    Var,
    Const,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub kind: SlotKind,
    pub ty: Symbol,
}

impl Slot {
    pub fn var(ty: &str) -> Slot {
        Slot { kind: SlotKind::Var, ty: Symbol::new(ty) }
    }

    pub fn constant(ty: &str) -> Slot {
        Slot { kind: SlotKind::Const, ty: Symbol::new(ty) }
    }

    fn to_term(&self) -> Term {
        let w = match self.kind {
            SlotKind::Var => "var",
            SlotKind::Const => "const",
        };
        Term::func(w, vec![Term::Sym(self.ty.clone())])
    }

    fn from_term(t: &Term) -> Option<Slot> {
        match t {
            Term::Fn(w, args) if args.len() == 1 => {
                let Term::Sym(ty) = &args[0] else { return None };
                match w.as_str() {
                    "var" => Some(Slot { kind: SlotKind::Var, ty: ty.clone() }),
                    "const" => Some(Slot { kind: SlotKind::Const, ty: ty.clone() }),
                    _ => None,
                }
            }
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// A fluent whose arguments are replaced by typed `var`/`const` slots.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeFluent {
    pub predicate: Symbol,
    pub slots: Vec<Slot>,
}

impl ModeFluent {
    pub fn new(predicate: &str, slots: Vec<Slot>) -> ModeFluent {
        ModeFluent { predicate: Symbol::new(predicate), slots }
    }

    pub fn to_term(&self) -> Term {
        if self.slots.is_empty() {
            Term::Sym(self.predicate.clone())
        } else {
            Term::Fn(self.predicate.clone(), self.slots.iter().map(Slot::to_term).collect())
        }
    }

    pub fn from_term(t: &Term) -> Option<ModeFluent> {
        match t {
            Term::Sym(p) => Some(ModeFluent { predicate: p.clone(), slots: vec![] }),
            Term::Fn(p, args) => Some(ModeFluent { predicate: p.clone(), slots: args.iter().map(Slot::from_term).collect::<Option<_>>()? }),
            _ => None,
        }
    }

    /// Whether the predicate is rooted in "be" (`be`, `be_in`, `be_afraid_of`).
    pub fn is_be(&self) -> bool {
        is_be_predicate(self.predicate.as_str())
    }
}

pub fn is_be_predicate(p: &str) -> bool {
    p == "be" || p.starts_with("be_")
}

impl fmt::Display for ModeFluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Placement {
    Head,
    Body,
}

/// `#modeh(..)` or `#modeb(..)`, optionally wrapped in an event-calculus
/// predicate whose last argument is `var(time)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeDecl {
    pub placement: Placement,
    pub wrapper: Option<EventKind>,
    pub fluent: ModeFluent,
}

impl ModeDecl {
    pub fn head(fluent: ModeFluent) -> ModeDecl {
        ModeDecl { placement: Placement::Head, wrapper: None, fluent }
    }

    pub fn body(fluent: ModeFluent) -> ModeDecl {
        ModeDecl { placement: Placement::Body, wrapper: None, fluent }
    }

    pub fn wrapped(placement: Placement, kind: EventKind, fluent: ModeFluent) -> ModeDecl {
        ModeDecl { placement, wrapper: Some(kind), fluent }
    }

    /// Slots in argument order; the time slot comes last.
    pub fn slots(&self) -> Vec<Slot> {
        let mut s = self.fluent.slots.clone();
        if self.wrapper.is_some() {
            s.push(Slot::var("time"));
        }
        s
    }

    /// The literal atom with `values` substituted for the slots.
    pub fn instantiate(&self, values: &[Term]) -> Atom {
        let n = self.fluent.slots.len();
        let fluent = Atom::new(self.fluent.predicate.as_str(), values[..n].to_vec());
        match self.wrapper {
            Some(kind) => kind.wrap(&fluent, values[n].clone()),
            None => fluent,
        }
    }

    fn scheme(&self) -> Term {
        match self.wrapper {
            Some(kind) => Term::func(kind.predicate(), vec![self.fluent.to_term(), Slot::var("time").to_term()]),
            None => self.fluent.to_term(),
        }
    }

    pub fn parse(text: &str) -> Result<ModeDecl, BiasError> {
        let bad = || BiasError::Parse(format!("not a mode declaration: `{}`", text.trim()));
        let t = text.trim().trim_end_matches('.').trim();
        let (placement, inner) = if let Some(r) = t.strip_prefix("#modeh(") {
            (Placement::Head, r)
        } else if let Some(r) = t.strip_prefix("#modeb(") {
            (Placement::Body, r)
        } else {
            return Err(bad());
        };
        let inner = inner.strip_suffix(')').ok_or_else(bad)?;
        let term = parse_term(inner).map_err(|_| bad())?;
        if let Term::Fn(name, args) = &term {
            if let Some(kind) = EventKind::from_predicate(name.as_str()) {
                if args.len() == 2 && Slot::from_term(&args[1]) == Some(Slot::var("time")) {
                    let fluent = ModeFluent::from_term(&args[0]).ok_or_else(bad)?;
                    return Ok(ModeDecl::wrapped(placement, kind, fluent));
                }
            }
        }
        let fluent = ModeFluent::from_term(&term).ok_or_else(bad)?;
        Ok(ModeDecl { placement, wrapper: None, fluent })
    }

    /// Parses one declaration per non-empty line; `%` starts a comment.
    pub fn parse_all(text: &str) -> Result<Vec<ModeDecl>, BiasError> {
        text.lines()
            .map(|l| l.split('%').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .flat_map(|l| l.split_inclusive(").").map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>())
            .map(ModeDecl::parse)
            .collect()
    }
}

impl fmt::Display for ModeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match self.placement {
            Placement::Head => "modeh",
            Placement::Body => "modeb",
        };
        write!(f, "#{d}({}).", self.scheme())
    }
}

/// Types the arguments of a parsed sentence. The query variable is typed by
/// the question word; constants by their part-of-speech tag. Temporal
/// arguments, adjectives and the variable of a "why" question become `const`.
pub fn mode_fluent(sentence: &Sentence, rep: &FluentRep, lexicon: &Lexicon) -> Result<ModeFluent, BiasError> {
    let atom = rep.atoms.first().ok_or_else(|| BiasError::Untypeable { sentence: sentence.text.clone(), arg: String::new() })?;
    let mut slots = Vec::with_capacity(atom.args.len());
    for arg in &atom.args {
        let untypeable = || BiasError::Untypeable { sentence: sentence.text.clone(), arg: arg.to_string() };
        let slot = match arg {
            Term::Var(_) => match sentence.wh {
                Some(Wh::What | Wh::When | Wh::Where) => Slot::var("nn"),
                Some(Wh::Who) => Slot::var("nnp"),
                Some(Wh::Why) => Slot::constant("jj"),
                Some(Wh::HowMany) => Slot::var("number"),
                _ => return Err(untypeable()),
            },
            Term::Int(_) => Slot::var("number"),
            Term::Sym(c) => match lexicon.tag(c.as_str()) {
                Some(Tag::Tmp) => Slot::constant("tmp"),
                Some(Tag::Jj) => Slot::constant("jj"),
                Some(t @ (Tag::Nnp | Tag::Nn | Tag::Number)) => Slot::var(t.as_str()),
                _ => return Err(untypeable()),
            },
            _ => return Err(untypeable()),
        };
        slots.push(slot);
    }
    Ok(ModeFluent { predicate: atom.predicate.clone(), slots })
}

/// Mode declarations for a story. Without event calculus, questions give
/// head declarations and "be" statements body declarations. With it, the
/// question fluent may be initiated or terminated and is observed through
/// `holdsAt`; "be" statements are observed as initiated or holding; other
/// statements are events.
pub fn generate_declarations(story: &[(Sentence, ModeFluent)], ec: bool) -> Vec<ModeDecl> {
    let mut out: Vec<ModeDecl> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |d: ModeDecl, out: &mut Vec<ModeDecl>| {
        if seen.insert(d.clone()) {
            out.push(d);
        }
    };
    if !ec {
        for (s, f) in story {
            if s.is_question {
                push(ModeDecl::head(f.clone()), &mut out);
            } else if f.is_be() {
                push(ModeDecl::body(f.clone()), &mut out);
            }
        }
        return out;
    }
    let statements: Vec<&ModeFluent> = story.iter().filter(|(s, _)| !s.is_question).map(|(_, f)| f).collect();
    for f in statements.iter().filter(|f| !f.is_be()) {
        push(ModeDecl::wrapped(Placement::Body, EventKind::HappensAt, (*f).clone()), &mut out);
    }
    for kind in [EventKind::InitiatedAt, EventKind::HoldsAt] {
        for f in statements.iter().filter(|f| f.is_be()) {
            push(ModeDecl::wrapped(Placement::Body, kind, (*f).clone()), &mut out);
        }
    }
    for (_, f) in story.iter().filter(|(s, _)| s.is_question) {
        push(ModeDecl::wrapped(Placement::Head, EventKind::InitiatedAt, f.clone()), &mut out);
        push(ModeDecl::wrapped(Placement::Head, EventKind::TerminatedAt, f.clone()), &mut out);
        push(ModeDecl::wrapped(Placement::Body, EventKind::HoldsAt, f.clone()), &mut out);
    }
    out
}
