use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An interned-by-refcount name. Cheap to clone, ordered by its text.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(s: &str) -> Self {
        Symbol(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `[a-z][a-zA-Z0-9_]*`
    pub fn is_constant_name(s: &str) -> bool {
        let mut chars = s.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }

    /// `[A-Z][a-zA-Z0-9_]*`
    pub fn is_variable_name(s: &str) -> bool {
        let mut chars = s.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_uppercase()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Symbol(Arc::from(s))
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A term of the dialect.
///
/// Besides constants, variables and compound terms, two restricted forms are
/// kept in the tree so that programs print back the way they were written:
/// `X+k` (only meaningful inside atom arguments, evaluated at grounding) and
/// the interval `a..b` (only inside facts, expanded at grounding).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Sym(Symbol),
    Int(i64),
    Var(Symbol),
    Fn(Symbol, Vec<Term>),
    Add(Box<Term>, i64),
    Range(i64, i64),
}

impl Term {
    pub fn sym(name: &str) -> Term {
        Term::Sym(Symbol::new(name))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(Symbol::new(name))
    }

    pub fn func(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::sym(functor)
        } else {
            Term::Fn(Symbol::new(functor), args)
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Sym(_) | Term::Int(_) => true,
            Term::Var(_) | Term::Add(..) | Term::Range(..) => false,
            Term::Fn(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::Sym(_) | Term::Int(_))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Fn(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Add(inner, _) => inner.collect_vars(out),
            Term::Sym(_) | Term::Int(_) | Term::Range(..) => {}
        }
    }

    pub fn has_range(&self) -> bool {
        match self {
            Term::Range(..) => true,
            Term::Fn(_, args) => args.iter().any(Term::has_range),
            Term::Add(inner, _) => inner.has_range(),
            _ => false,
        }
    }

    /// Applies a binding map. Arithmetic is folded when its operand becomes an
    /// integer; `None` when it cannot be (e.g. `kitchen+1`).
    pub fn substitute(&self, bindings: &Bindings) -> Option<Term> {
        Some(match self {
            Term::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Fn(f, args) => Term::Fn(f.clone(), args.iter().map(|a| a.substitute(bindings)).collect::<Option<Vec<_>>>()?),
            Term::Add(inner, k) => match inner.substitute(bindings)? {
                Term::Int(n) => Term::Int(n + k),
                t if t.is_ground() => return None,
                t => Term::Add(Box::new(t), *k),
            },
            Term::Sym(_) | Term::Int(_) | Term::Range(..) => self.clone(),
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Sym(s) | Term::Var(s) => write!(f, "{s}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Fn(name, args) => {
                write!(f, "{name}(")?;
                write_joined(f, args, ",")?;
                f.write_str(")")
            }
            Term::Add(inner, k) => write!(f, "{inner}+{k}"),
            Term::Range(lo, hi) => write!(f, "{lo}..{hi}"),
        }
    }
}

/// Variable bindings produced by unification and consumed by substitution.
pub type Bindings = BTreeMap<Symbol, Term>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom {
    pub predicate: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: Symbol::new(predicate), args }
    }

    pub fn prop(predicate: &str) -> Atom {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }

    pub fn substitute(&self, bindings: &Bindings) -> Option<Atom> {
        Some(Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|a| a.substitute(bindings)).collect::<Option<Vec<_>>>()?,
        })
    }

    /// The atom seen as a term, e.g. for nesting a fluent inside `holdsAt/2`.
    pub fn to_term(&self) -> Term {
        if self.args.is_empty() {
            Term::Sym(self.predicate.clone())
        } else {
            Term::Fn(self.predicate.clone(), self.args.clone())
        }
    }

    pub fn from_term(term: &Term) -> Option<Atom> {
        match term {
            Term::Sym(s) => Some(Atom { predicate: s.clone(), args: vec![] }),
            Term::Fn(f, args) => Some(Atom { predicate: f.clone(), args: args.clone() }),
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_joined(f, &self.args, ",")?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, negated: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rule {
    Fact(Atom),
    Normal { head: Atom, body: Vec<Literal> },
    Constraint { body: Vec<Literal> },
    Choice { lower: i64, upper: i64, heads: Vec<Atom>, body: Vec<Literal> },
}

impl Rule {
    pub fn body(&self) -> &[Literal] {
        match self {
            Rule::Fact(_) => &[],
            Rule::Normal { body, .. } | Rule::Constraint { body } | Rule::Choice { body, .. } => body,
        }
    }

    pub fn head_atoms(&self) -> Vec<&Atom> {
        match self {
            Rule::Fact(h) | Rule::Normal { head: h, .. } => vec![h],
            Rule::Constraint { .. } => vec![],
            Rule::Choice { heads, .. } => heads.iter().collect(),
        }
    }

    /// Every atom occurring in the rule, heads first.
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.head_atoms().into_iter().chain(self.body().iter().map(|l| &l.atom))
    }

    pub fn is_ground(&self) -> bool {
        self.atoms().all(|a| a.is_ground())
    }

    pub fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for atom in self.atoms() {
            atom.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    /// Rebuilds a normal rule or fact from a head and body.
    pub fn with_body(head: Atom, body: Vec<Literal>) -> Rule {
        if body.is_empty() {
            Rule::Fact(head)
        } else {
            Rule::Normal { head, body }
        }
    }

    pub fn substitute(&self, b: &Bindings) -> Option<Rule> {
        let body = |body: &[Literal]| -> Option<Vec<Literal>> {
            body.iter().map(|l| Some(Literal { atom: l.atom.substitute(b)?, negated: l.negated })).collect()
        };
        Some(match self {
            Rule::Fact(h) => Rule::Fact(h.substitute(b)?),
            Rule::Normal { head, body: bd } => Rule::Normal { head: head.substitute(b)?, body: body(bd)? },
            Rule::Constraint { body: bd } => Rule::Constraint { body: body(bd)? },
            Rule::Choice { lower, upper, heads, body: bd } => Rule::Choice {
                lower: *lower,
                upper: *upper,
                heads: heads.iter().map(|h| h.substitute(b)).collect::<Option<_>>()?,
                body: body(bd)?,
            },
        })
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, body: &[Literal]) -> fmt::Result {
    if !body.is_empty() {
        f.write_str(" :- ")?;
        write_joined(f, body, ", ")?;
    }
    Ok(())
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Fact(h) => write!(f, "{h}.")?,
            Rule::Normal { head, body } => {
                write!(f, "{head}")?;
                write_body(f, body)?;
                f.write_str(".")?;
            }
            Rule::Constraint { body } => {
                f.write_str(":-")?;
                if !body.is_empty() {
                    f.write_str(" ")?;
                    write_joined(f, body, ", ")?;
                }
                f.write_str(".")?;
            }
            Rule::Choice { lower, upper, heads, body } => {
                write!(f, "{lower}{{")?;
                write_joined(f, heads, "; ")?;
                write!(f, "}}{upper}")?;
                write_body(f, body)?;
                f.write_str(".")?;
            }
        }
        Ok(())
    }
}

/// An ordered list of rules.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Program {
        Program { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
    }

    pub fn extend(&mut self, other: &Program) {
        self.rules.extend(other.rules.iter().cloned());
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Program>) -> Program {
        let mut out = Program::default();
        for p in parts {
            out.extend(p);
        }
        out
    }

    pub fn has_choice(&self) -> bool {
        self.rules.iter().any(|r| matches!(r, Rule::Choice { .. }))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromIterator<Rule> for Program {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        Program { rules: iter.into_iter().collect() }
    }
}

pub(crate) fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}
