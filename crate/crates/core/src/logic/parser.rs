//! Text syntax for the dialect.
//!
//! Rules are `head :- b1, ..., not c1, ... .`, constraints `:- ... .`,
//! choice rules `l{h1; ...; hk}u :- ... .` and facts `a.`. Body and choice
//! element separators may be `,` or `;`. `%` starts a line comment.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::term::{Atom, Literal, Program, Rule, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: variable {var} is unsafe in `{rule}`")]
    Unsafe { line: usize, var: String, rule: String },
    #[error("line {line}: predicate {predicate} used with arity {found} but earlier with arity {expected}")]
    ArityClash { line: usize, predicate: String, expected: usize, found: usize },
    #[error("line {line}: choice bounds {lower}..{upper} invalid for {heads} head atoms")]
    ChoiceBounds { line: usize, lower: i64, upper: i64, heads: usize },
    #[error("line {line}, column {col}: aggregates unsupported (#{name})")]
    AggregatesUnsupported { line: usize, col: usize, name: String },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Anon,
    Int(i64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Dot,
    DotDot,
    If,
    Plus,
    Tilde,
    Cmp(String),
    Hash(String),
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: start.0, col: start.1 });
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => push(&mut out, Tok::LParen),
            ')' => push(&mut out, Tok::RParen),
            '{' => push(&mut out, Tok::LBrace),
            '}' => push(&mut out, Tok::RBrace),
            ',' => push(&mut out, Tok::Comma),
            ';' => push(&mut out, Tok::Semi),
            '+' => push(&mut out, Tok::Plus),
            '~' => push(&mut out, Tok::Tilde),
            '.' => {
                if chars.get(i + 1) == Some(&'.') {
                    push(&mut out, Tok::DotDot);
                    i += 2;
                    col += 2;
                    continue;
                }
                push(&mut out, Tok::Dot);
            }
            ':' if chars.get(i + 1) == Some(&'-') => {
                push(&mut out, Tok::If);
                i += 2;
                col += 2;
                continue;
            }
            '=' | '<' | '>' | '!' => {
                let mut s = String::from(c);
                if chars.get(i + 1) == Some(&'=') {
                    s.push('=');
                }
                let n = s.len();
                push(&mut out, Tok::Cmp(s));
                i += n;
                col += n;
                continue;
            }
            '_' => push(&mut out, Tok::Anon),
            '#' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let name: String = chars[i + 1..j].iter().collect();
                push(&mut out, Tok::Hash(name));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                let n = digits.parse::<i64>().map_err(|_| ParseError::Syntax {
                    line,
                    col,
                    msg: format!("integer literal {digits} out of range"),
                })?;
                push(&mut out, Tok::Int(n));
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if c.is_ascii_uppercase() {
                    push(&mut out, Tok::Var(word));
                } else {
                    push(&mut out, Tok::Ident(word));
                }
                col += j - i;
                i = j;
                continue;
            }
            other => return Err(ParseError::Syntax { line, col, msg: format!("unexpected character {other:?}") }),
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

const AGGREGATES: [&str; 5] = ["count", "sum", "min", "max", "sum+"];

pub(crate) struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Parser, ParseError> {
        let toks = tokenize(text)?;
        let lines: Vec<&str> = text.split('\n').collect();
        let eof = (lines.len(), lines.last().map_or(0, |l| l.chars().count()) + 1);
        Ok(Parser { toks, pos: 0, eof })
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    pub(crate) fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.eof, |s| (s.line, s.col))
    }

    pub(crate) fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError::Syntax { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    /// Rejects aggregate directives anywhere in the input up front.
    /// Aggregates are detected on the raw text so that their element syntax
    /// (`Z: ...`) does not surface as an unrelated lexer error first.
    fn reject_aggregates(text: &str) -> Result<(), ParseError> {
        for (li, line) in text.split('\n').enumerate() {
            let line = line.split('%').next().unwrap_or("");
            for (bi, _) in line.match_indices('#') {
                let rest = &line[bi + 1..];
                let name: String = rest.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '+').collect();
                if AGGREGATES.contains(&name.as_str()) {
                    return Err(ParseError::AggregatesUnsupported { line: li + 1, col: line[..bi].chars().count() + 1, name });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn parse_term(&mut self) -> Result<Term, ParseError> {
        let base = match self.bump() {
            Some(Tok::Ident(name)) => {
                if self.eat(&Tok::LParen) {
                    let args = self.parse_terms(&Tok::RParen)?;
                    Term::Fn(Symbol::from(name), args)
                } else {
                    Term::Sym(Symbol::from(name))
                }
            }
            Some(Tok::Var(name)) => Term::Var(Symbol::from(name)),
            Some(Tok::Int(n)) => {
                if self.eat(&Tok::DotDot) {
                    match self.bump() {
                        Some(Tok::Int(m)) => Term::Range(n, m),
                        _ => {
                            self.pos -= 1;
                            return self.error("expected integer after `..`");
                        }
                    }
                } else {
                    Term::Int(n)
                }
            }
            Some(Tok::Anon) => {
                self.pos -= 1;
                return self.error("anonymous variables are not supported");
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.error("expected a term");
            }
        };
        if self.eat(&Tok::Plus) {
            match self.bump() {
                Some(Tok::Int(k)) if matches!(base, Term::Var(_) | Term::Int(_)) => {
                    return Ok(Term::Add(Box::new(base), k));
                }
                _ => {
                    self.pos -= 1;
                    return self.error("only `X+integer` arithmetic is supported");
                }
            }
        }
        Ok(base)
    }

    fn parse_terms(&mut self, close: &Tok) -> Result<Vec<Term>, ParseError> {
        let mut args = vec![self.parse_term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.parse_term()?);
        }
        self.expect(close, "`)`")?;
        Ok(args)
    }

    pub(crate) fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        match self.peek() {
            Some(Tok::Ident(name)) if name != "not" => {
                let name = name.clone();
                self.pos += 1;
                let args = if self.eat(&Tok::LParen) { self.parse_terms(&Tok::RParen)? } else { vec![] };
                Ok(Atom { predicate: Symbol::from(name), args })
            }
            _ => self.error("expected an atom"),
        }
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        let negated = matches!(self.peek(), Some(Tok::Ident(n)) if n == "not") && matches!(self.peek_at(1), Some(Tok::Ident(_)));
        if negated {
            self.pos += 1;
        }
        let atom = self.parse_atom()?;
        if let Some(Tok::Cmp(_)) = self.peek() {
            return self.error("comparison literals are not supported");
        }
        Ok(Literal { atom, negated })
    }

    fn parse_body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut body = vec![self.parse_literal()?];
        while self.eat(&Tok::Comma) || self.eat(&Tok::Semi) {
            body.push(self.parse_literal()?);
        }
        Ok(body)
    }

    fn parse_choice_elements(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut heads = vec![self.parse_atom()?];
        while self.eat(&Tok::Comma) || self.eat(&Tok::Semi) {
            heads.push(self.parse_atom()?);
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(heads)
    }

    /// One statement, without the trailing `.`.
    pub(crate) fn parse_rule(&mut self) -> Result<Rule, ParseError> {
        if self.eat(&Tok::If) {
            let body = if matches!(self.peek(), Some(Tok::Dot)) { vec![] } else { self.parse_body()? };
            return Ok(Rule::Constraint { body });
        }
        let choice_lower = match (self.peek(), self.peek_at(1)) {
            (Some(Tok::Int(n)), Some(Tok::LBrace)) => {
                let n = *n;
                self.pos += 2;
                Some(Some(n))
            }
            (Some(Tok::LBrace), _) => {
                self.pos += 1;
                Some(None)
            }
            _ => None,
        };
        if let Some(lower) = choice_lower {
            let heads = self.parse_choice_elements()?;
            let upper = match self.peek() {
                Some(Tok::Int(n)) => {
                    let n = *n;
                    self.pos += 1;
                    n
                }
                _ => heads.len() as i64,
            };
            let body = if self.eat(&Tok::If) { self.parse_body()? } else { vec![] };
            return Ok(Rule::Choice { lower: lower.unwrap_or(0), upper, heads, body });
        }
        if let Some(Tok::Hash(name)) = self.peek() {
            let name = name.clone();
            return self.error(format!("directive #{name} is not part of the program dialect"));
        }
        let head = self.parse_atom()?;
        if self.eat(&Tok::If) {
            let body = self.parse_body()?;
            Ok(Rule::Normal { head, body })
        } else {
            Ok(Rule::Fact(head))
        }
    }
}

/// Parses and validates a program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::reject_aggregates(text)?;
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    let mut lines = Vec::new();
    while !p.at_end() {
        let line = p.here().0;
        let rule = p.parse_rule()?;
        p.expect(&Tok::Dot, "`.` at end of rule")?;
        rules.push(rule);
        lines.push(line);
    }
    let program = Program { rules };
    validate_with_lines(&program, |i| lines[i])?;
    Ok(program)
}

pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text)?;
    let atom = p.parse_atom()?;
    p.eat(&Tok::Dot);
    if !p.at_end() {
        return p.error("trailing input after atom");
    }
    Ok(atom)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let term = p.parse_term()?;
    if !p.at_end() {
        return p.error("trailing input after term");
    }
    Ok(term)
}

/// Checks safety, choice bounds and arity consistency. Line numbers in
/// errors are rule indices (1-based) for programs built in code.
pub fn validate(program: &Program) -> Result<(), ParseError> {
    validate_with_lines(program, |i| i + 1)
}

fn validate_with_lines(program: &Program, line_of: impl Fn(usize) -> usize) -> Result<(), ParseError> {
    let mut arities: HashMap<Symbol, usize> = HashMap::new();
    for (i, rule) in program.rules.iter().enumerate() {
        let line = line_of(i);
        check_safety(rule).map_err(|var| ParseError::Unsafe { line, var: var.to_string(), rule: rule.to_string() })?;
        if let Rule::Choice { lower, upper, heads, .. } = rule {
            if *lower < 0 || lower > upper || *upper > heads.len() as i64 {
                return Err(ParseError::ChoiceBounds { line, lower: *lower, upper: *upper, heads: heads.len() });
            }
        }
        for atom in rule.atoms() {
            match arities.get(&atom.predicate) {
                Some(&expected) if expected != atom.arity() => {
                    return Err(ParseError::ArityClash { line, predicate: atom.predicate.to_string(), expected, found: atom.arity() })
                }
                Some(_) => {}
                None => {
                    arities.insert(atom.predicate.clone(), atom.arity());
                }
            }
        }
        let range_misplaced = match rule {
            Rule::Fact(_) => false,
            _ => rule.atoms().any(|a| a.args.iter().any(Term::has_range)),
        };
        if range_misplaced {
            return Err(ParseError::Syntax { line, col: 1, msg: "intervals are only allowed in facts".into() });
        }
    }
    Ok(())
}

/// Returns the first variable that does not occur in a positive body literal.
fn check_safety(rule: &Rule) -> Result<(), Symbol> {
    let mut bound = BTreeSet::new();
    for lit in rule.body().iter().filter(|l| !l.negated) {
        lit.atom.args.iter().for_each(|t| t.collect_vars(&mut bound));
    }
    match rule.vars().into_iter().find(|v| !bound.contains(v)) {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sdec_axiom() {
        let p = parse_program("holdsAt(F,T+1) :- initiatedAt(F,T),time(T).").unwrap();
        assert_eq!(p.len(), 1);
        match &p.rules[0] {
            Rule::Normal { head, body } => {
                assert_eq!(body.len(), 2);
                assert_eq!(head.args[1], Term::Add(Box::new(Term::var("T")), 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_is_empty_program() {
        assert!(parse_program("").unwrap().is_empty());
        assert!(parse_program("  % only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn unsafe_variable_is_named() {
        match parse_program("p(X) :- not q(X).") {
            Err(ParseError::Unsafe { var, .. }) => assert_eq!(var, "X"),
            other => panic!("expected safety error, got {other:?}"),
        }
        assert!(matches!(parse_program("p(X)."), Err(ParseError::Unsafe { .. })));
    }

    #[test]
    fn arity_clash() {
        let err = parse_program("p(a).\np(a,b).").unwrap_err();
        assert!(matches!(err, ParseError::ArityClash { line: 2, expected: 1, found: 2, .. }), "{err}");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("a.\nb :- c,\n").unwrap_err();
        match err {
            ParseError::Syntax { line, .. } => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
        let err = parse_program("a :- b").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 1, .. }));
    }

    #[test]
    fn separators_are_interchangeable() {
        let a = parse_program(":- a; not b.").unwrap();
        let b = parse_program(":- a, not b.").unwrap();
        assert_eq!(a, b);
        let c = parse_program("{p, q}.").unwrap();
        let d = parse_program("0{p; q}2.").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn choice_and_interval() {
        let p = parse_program("1{a;b}1.\ntime(1..3).").unwrap();
        assert!(matches!(&p.rules[0], Rule::Choice { lower: 1, upper: 1, heads, .. } if heads.len() == 2));
        assert_eq!(p.rules[1], Rule::Fact(Atom::new("time", vec![Term::Range(1, 3)])));
        assert!(matches!(parse_program("2{a;b}1."), Err(ParseError::ChoiceBounds { .. })));
        assert!(matches!(parse_program("1{a;b}3."), Err(ParseError::ChoiceBounds { .. })));
    }

    #[test]
    fn aggregates_rejected() {
        let err = parse_program("carriedItems(X,N,T) :- holdsAt(carry(X,_),T), N = #count{Z: holdsAt(carry(X,Z),T)}.").unwrap_err();
        assert!(matches!(err, ParseError::AggregatesUnsupported { ref name, .. } if name == "count"), "{err}");
        assert!(err.to_string().contains("aggregates unsupported"));
    }

    #[test]
    fn bottom_is_not_user_syntax() {
        assert!(parse_program("⊥ :- a.").is_err());
    }

    #[test]
    fn print_round_trip_examples() {
        let text = "holdsAt(F,T+1) :- holdsAt(F,T), not terminatedAt(F,T), time(T).\n\
                    :- a, not b.\n1{x(1); x(2)}2 :- y.\ntime(1..3).\np.\n";
        let p = parse_program(text).unwrap();
        assert_eq!(p.to_string(), text);
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }
}
