use super::term::{Atom, Bindings, Term};

/// One-sided unification of a pattern against a ground atom.
///
/// Returns the variable bindings that make `pattern` equal to `ground`, or
/// `None` when no such bindings exist. Repeated variables must bind to the same
/// term. `X+k` in the pattern matches an integer `n` with `X = n-k`.
pub fn unify(pattern: &Atom, ground: &Atom) -> Option<Bindings> {
    let mut bindings = Bindings::new();
    unify_atom_with(pattern, ground, &mut bindings).then_some(bindings)
}

/// Like [`unify`] but extends existing bindings. On failure `bindings` may
/// hold partial entries and should be discarded.
pub fn unify_atom_with(pattern: &Atom, ground: &Atom, bindings: &mut Bindings) -> bool {
    pattern.predicate == ground.predicate
        && pattern.args.len() == ground.args.len()
        && pattern.args.iter().zip(&ground.args).all(|(p, g)| unify_term(p, g, bindings))
}

fn unify_term(pattern: &Term, ground: &Term, bindings: &mut Bindings) -> bool {
    match pattern {
        Term::Var(v) => match bindings.get(v) {
            Some(bound) => bound == ground,
            None => {
                bindings.insert(v.clone(), ground.clone());
                true
            }
        },
        Term::Fn(f, args) => match ground {
            Term::Fn(g, gargs) if f == g && args.len() == gargs.len() => args.iter().zip(gargs).all(|(p, g)| unify_term(p, g, bindings)),
            _ => false,
        },
        Term::Add(inner, k) => match ground {
            Term::Int(n) => unify_term(inner, &Term::Int(n - k), bindings),
            _ => false,
        },
        Term::Sym(_) | Term::Int(_) | Term::Range(..) => pattern == ground,
    }
}
