//! Script syntax: clauses, queries and directives.
//!
//! A script is a sequence of items, each terminated by a period:
//!
//! ```text
//! :- prefix(vin, "http://www.w3.org/TR/2003/PR-owl-guide-20031215/wine#").
//! :- import("http://example.org/ontology/vin.nt").
//! :- reasoner("rdfs").
//! :- sort(price(vin_Wine), currency_Dollar).
//!
//! likes(X:vin_Wine) :- dry(X), not(expensive(X)).
//! neg(expensive(vin_Wine:vin_Bancroft)).
//! :- solve(likes(X)).
//! ```
//!
//! Identifiers starting with an uppercase letter or `_` are variables, the
//! rest are constants and functors. `prefix_Local` tokens resolve against
//! the declared prefixes on their first underscore, so `vin_Wine` names the
//! wine class IRI. A variable is typed by a suffix (`X:vin_Wine`), a
//! constant by an explicit type in front (`vin_Wine:vin_Merlot`, with
//! numbers allowed as names: `math_Percentage:10`). Quoted strings are
//! constants taken literally, never prefix-resolved; `<...>` is a raw IRI.
//!
//! `not(...)` is negation as failure, `neg(...)` explicit negation, and the
//! comparisons `>`, `<`, `>=`, `=<`, `=` are written infix. Queries appear
//! as `:-solve(goal)` (the historical `:-sovle` misspelling is accepted) or
//! `:-eval(goal)`, which asks for all answers; a bare `:- goal.` works like
//! solve.

use std::fmt;

use thiserror::Error;

use crate::registry::known_reasoner_mode;
use crate::sorts::{Prefixes, TypeRef};
use crate::term::{Atom, Clause, Literal, Program, Term, COMPARISON_PREDS};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

/// Predicates the engine answers itself; they cannot head a clause.
pub const BUILTIN_PREDS: [&str; 2] = ["rdf", "instance_of"];

#[derive(Clone, Debug, PartialEq)]
pub enum Directive {
    Import { url: String },
    Reasoner { mode: String },
    Prefix { name: String, base: String },
    SortDecl { functor: String, arg_types: Vec<TypeRef>, result: TypeRef },
}

/// A query as written: `solve` (and a bare `:- goal.`) asks for every
/// answer, `eval` stops at the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub goal: Clause,
    pub all_answers: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ParsedScript {
    pub directives: Vec<Directive>,
    pub program: Program,
    pub queries: Vec<Query>,
}

/// Parses a whole script. Prefix directives take effect immediately, so
/// `prefixes` accumulates declarations for later printing.
pub fn parse_script(text: &str, prefixes: &mut Prefixes) -> Result<ParsedScript, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, prefixes, anon: 0 };
    p.script()
}

/// Parses a single goal, `p(X), not(q(X))`, with an optional trailing
/// period. Used by the interactive loop.
pub fn parse_goal(text: &str, prefixes: &Prefixes) -> Result<Clause, ParseError> {
    let toks = lex(text)?;
    let mut scratch = prefixes.clone();
    let mut p = Parser { toks, pos: 0, prefixes: &mut scratch, anon: 0 };
    let body = p.body()?;
    if p.peek() == Some(&Tok::Dot) {
        p.pos += 1;
    }
    p.expect_eof()?;
    Ok(Clause::goal(body))
}

/// Parses one term, mostly for tests and the interactive loop.
pub fn parse_term(text: &str, prefixes: &Prefixes) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut scratch = prefixes.clone();
    let mut p = Parser { toks, pos: 0, prefixes: &mut scratch, anon: 0 };
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Iri(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    Dot,
    Colon,
    If,
    Ask,
    Op(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Num(s) => write!(f, "{s}"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Iri(s) => write!(f, "<{s}>"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Bar => write!(f, "|"),
            Tok::Dot => write!(f, "."),
            Tok::Colon => write!(f, ":"),
            Tok::If => write!(f, ":-"),
            Tok::Ask => write!(f, "?-"),
            Tok::Op(s) => write!(f, "{s}"),
        }
    }
}

struct Sp {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Sp>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    fn advance(chars: &[char], i: &mut usize, line: &mut u32, col: &mut u32) {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c.is_whitespace() {
            advance(&chars, &mut i, &mut line, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            out.push(Sp { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            advance(&chars, &mut i, &mut line, &mut col);
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&chars, &mut i, &mut line, &mut col);
            }
            if i < chars.len()
                && chars[i] == '.'
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                advance(&chars, &mut i, &mut line, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&chars, &mut i, &mut line, &mut col);
                }
            }
            out.push(Sp { tok: Tok::Num(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c == '"' {
            advance(&chars, &mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(ParseError { line: tl, col: tc, msg: "unterminated string".into() });
                };
                advance(&chars, &mut i, &mut line, &mut col);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(ParseError {
                                line: tl,
                                col: tc,
                                msg: "unterminated string".into(),
                            });
                        };
                        advance(&chars, &mut i, &mut line, &mut col);
                        s.push(match e {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            other => other,
                        });
                    }
                    other => s.push(other),
                }
            }
            out.push(Sp { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        if c == '<' {
            // An IRI if a `>` closes it before any whitespace: `<http://...>`.
            // Otherwise the comparison operator.
            let mut j = i + 1;
            let mut is_iri = false;
            while j < chars.len() {
                match chars[j] {
                    '>' => {
                        is_iri = j > i + 1;
                        break;
                    }
                    d if d.is_whitespace() => break,
                    _ => j += 1,
                }
            }
            if is_iri {
                let iri: String = chars[i + 1..j].iter().collect();
                while i <= j {
                    advance(&chars, &mut i, &mut line, &mut col);
                }
                out.push(Sp { tok: Tok::Iri(iri), line: tl, col: tc });
            } else {
                advance(&chars, &mut i, &mut line, &mut col);
                out.push(Sp { tok: Tok::Op("<"), line: tl, col: tc });
            }
            continue;
        }
        let two = chars.get(i + 1).copied();
        let found = match (c, two) {
            (':', Some('-')) => Some((Tok::If, 2)),
            ('?', Some('-')) => Some((Tok::Ask, 2)),
            ('>', Some('=')) => Some((Tok::Op(">="), 2)),
            ('=', Some('<')) => Some((Tok::Op("=<"), 2)),
            ('>', _) => Some((Tok::Op(">"), 1)),
            ('=', _) => Some((Tok::Op("="), 1)),
            (':', _) => Some((Tok::Colon, 1)),
            ('(', _) => Some((Tok::LParen, 1)),
            (')', _) => Some((Tok::RParen, 1)),
            ('[', _) => Some((Tok::LBracket, 1)),
            (']', _) => Some((Tok::RBracket, 1)),
            (',', _) => Some((Tok::Comma, 1)),
            ('|', _) => Some((Tok::Bar, 1)),
            ('.', _) => Some((Tok::Dot, 1)),
            _ => None,
        };
        match found {
            Some((tok, n)) => {
                for _ in 0..n {
                    advance(&chars, &mut i, &mut line, &mut col);
                }
                out.push(Sp { tok, line: tl, col: tc });
            }
            None => {
                return Err(ParseError {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character {c:?}"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'p> {
    toks: Vec<Sp>,
    pos: usize,
    prefixes: &'p mut Prefixes,
    anon: u32,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    /// Errors at the token just consumed.
    fn fail_prev<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let sp = &self.toks[self.pos.saturating_sub(1)];
        Err(ParseError { line: sp.line, col: sp.col, msg: msg.into() })
    }

    fn next(&mut self, what: &str) -> Result<Tok, ParseError> {
        match self.toks.get(self.pos) {
            Some(sp) => {
                self.pos += 1;
                Ok(sp.tok.clone())
            }
            None => {
                let (line, col) = self.here();
                Err(ParseError { line, col, msg: format!("expected {what}, found end of input") })
            }
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let (line, col) = self.here();
        match self.toks.get(self.pos) {
            Some(sp) if sp.tok == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(sp) => {
                Err(ParseError { line, col, msg: format!("expected {what}, found \"{}\"", sp.tok) })
            }
            None => {
                Err(ParseError { line, col, msg: format!("expected {what}, found end of input") })
            }
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(sp) => Err(ParseError {
                line: sp.line,
                col: sp.col,
                msg: format!("expected end of input, found \"{}\"", sp.tok),
            }),
        }
    }

    fn script(&mut self) -> Result<ParsedScript, ParseError> {
        let mut out = ParsedScript::default();
        while self.peek().is_some() {
            if self.peek() == Some(&Tok::If) {
                self.pos += 1;
                self.directive_or_query(&mut out)?;
            } else if self.peek() == Some(&Tok::Ask) {
                self.pos += 1;
                let body = self.body()?;
                self.expect(Tok::Dot, "\".\"")?;
                self.push_query(&mut out, body, false);
            } else {
                let clause = self.clause()?;
                out.program.clauses.push(clause);
            }
        }
        Ok(out)
    }

    fn push_query(&self, out: &mut ParsedScript, body: Vec<Literal>, all_answers: bool) {
        let goal = Clause::goal(body);
        out.program.queries.push(goal.clone());
        out.queries.push(Query { goal, all_answers });
    }

    fn directive_or_query(&mut self, out: &mut ParsedScript) -> Result<(), ParseError> {
        let keyword = match (self.peek(), self.peek2()) {
            (Some(Tok::Ident(name)), Some(Tok::LParen)) => Some(name.clone()),
            _ => None,
        };
        match keyword.as_deref() {
            Some("import") => {
                self.pos += 2;
                let url = self.string_or_iri("an ontology location")?;
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Dot, "\".\"")?;
                out.directives.push(Directive::Import { url });
            }
            Some("reasoner") => {
                self.pos += 2;
                let mode = match self.next("a reasoner mode")? {
                    Tok::Str(s) => s,
                    Tok::Ident(s) => s,
                    other => {
                        return self.fail_prev(format!(
                            "expected a reasoner mode, found \"{other}\""
                        ));
                    }
                };
                if !known_reasoner_mode(&mode) {
                    return self.fail_prev(format!("unknown reasoner mode \"{mode}\""));
                }
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Dot, "\".\"")?;
                out.directives.push(Directive::Reasoner { mode });
            }
            Some("prefix") => {
                self.pos += 2;
                let name = match self.next("a prefix name")? {
                    Tok::Ident(s) => s,
                    Tok::Str(s) => s,
                    other => {
                        return self.fail_prev(format!("expected a prefix name, found \"{other}\""));
                    }
                };
                self.expect(Tok::Comma, "\",\"")?;
                let base = self.string_or_iri("a namespace IRI")?;
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Dot, "\".\"")?;
                self.prefixes.declare(&name, &base);
                out.directives.push(Directive::Prefix { name, base });
            }
            Some("sort") => {
                self.pos += 2;
                let functor = match self.next("a functor")? {
                    Tok::Ident(s) if !starts_like_var(&s) => s,
                    other => {
                        return self.fail_prev(format!("expected a functor, found \"{other}\""));
                    }
                };
                self.expect(Tok::LParen, "\"(\"")?;
                let mut arg_types = vec![self.type_ref()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    arg_types.push(self.type_ref()?);
                }
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Comma, "\",\"")?;
                let result = self.type_ref()?;
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Dot, "\".\"")?;
                out.directives.push(Directive::SortDecl { functor, arg_types, result });
            }
            Some(q @ ("solve" | "sovle" | "eval")) => {
                let all = q != "eval";
                self.pos += 2;
                let body = self.body()?;
                self.expect(Tok::RParen, "\")\"")?;
                self.expect(Tok::Dot, "\".\"")?;
                self.push_query(out, body, all);
            }
            _ => {
                // A plain directive goal, `:- p(X), q.`, runs like solve.
                let body = self.body()?;
                self.expect(Tok::Dot, "\".\"")?;
                self.push_query(out, body, true);
            }
        }
        Ok(())
    }

    fn string_or_iri(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next(what)? {
            Tok::Str(s) => Ok(s),
            Tok::Iri(s) => Ok(s),
            other => self.fail_prev(format!("expected {what}, found \"{other}\"")),
        }
    }

    fn type_ref(&mut self) -> Result<TypeRef, ParseError> {
        match self.next("a type")? {
            Tok::Ident(s) => {
                let iri = self.prefixes.resolve_underscore(&s).unwrap_or(s);
                Ok(TypeRef::new(&iri))
            }
            Tok::Iri(s) => Ok(TypeRef::new(&s)),
            other => self.fail_prev(format!("expected a type, found \"{other}\"")),
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let head = self.literal()?;
        if head.naf {
            return self.fail_prev("not(...) cannot appear in a clause head");
        }
        if COMPARISON_PREDS.contains(&&*head.atom.pred) {
            return self.fail_prev(format!("comparison \"{}\" cannot head a clause", head.atom.pred));
        }
        if BUILTIN_PREDS.contains(&&*head.atom.pred) {
            return self
                .fail_prev(format!("\"{}\" is built in and cannot be defined", head.atom.pred));
        }
        let body = if self.peek() == Some(&Tok::If) {
            self.pos += 1;
            self.body()?
        } else {
            Vec::new()
        };
        self.expect(Tok::Dot, "\".\"")?;
        Ok(Clause { head: Some(head), body })
    }

    fn body(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut out = vec![self.literal()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let keyword = match (self.peek(), self.peek2()) {
            (Some(Tok::Ident(name)), Some(Tok::LParen)) if name == "not" || name == "neg" => {
                Some(name.clone())
            }
            _ => None,
        };
        match keyword.as_deref() {
            Some("not") => {
                self.pos += 2;
                let inner = self.literal()?;
                if inner.naf {
                    return self.fail_prev("not(not(...)) is not supported, simplify the rule");
                }
                self.expect(Tok::RParen, "\")\"")?;
                Ok(Literal::not(inner))
            }
            Some("neg") => {
                self.pos += 2;
                let atom = self.plain_atom()?;
                self.expect(Tok::RParen, "\")\"")?;
                Ok(Literal::neg(atom))
            }
            _ => {
                let atom = self.comparison_or_atom()?;
                Ok(Literal::pos(atom))
            }
        }
    }

    /// A positive atom: either an infix comparison between two terms or a
    /// predicate application.
    fn comparison_or_atom(&mut self) -> Result<Atom, ParseError> {
        let looks_like_atom = matches!(
            self.peek(),
            Some(Tok::Ident(name)) if !starts_like_var(name)
        );
        if looks_like_atom && self.peek2() != Some(&Tok::Colon) {
            let atom = self.plain_atom()?;
            // `f(X) = T` compares a compound; reinterpret the atom as a term.
            if let Some(Tok::Op(op)) = self.peek() {
                let op = *op;
                self.pos += 1;
                let lhs = self.atom_as_term(&atom);
                let rhs = self.term()?;
                return Ok(Atom::new(op, vec![lhs, rhs]));
            }
            return Ok(atom);
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Some(Tok::Op(op)) => *op,
            _ => return self.fail("expected a predicate or comparison"),
        };
        self.pos += 1;
        let rhs = self.term()?;
        Ok(Atom::new(op, vec![lhs, rhs]))
    }

    fn plain_atom(&mut self) -> Result<Atom, ParseError> {
        let pred = match self.next("a predicate")? {
            Tok::Ident(s) if !starts_like_var(&s) => s,
            Tok::Ident(s) => {
                return self.fail_prev(format!("predicate \"{s}\" must start with a lowercase letter"));
            }
            other => return self.fail_prev(format!("expected a predicate, found \"{other}\"")),
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            args.push(self.term()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "\")\"")?;
        }
        Ok(Atom::new(&pred, args))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.next("a term")? {
            Tok::Ident(name) if starts_like_var(&name) => {
                let name = if name == "_" {
                    self.anon += 1;
                    format!("_{}", self.anon)
                } else {
                    name
                };
                if self.peek() == Some(&Tok::Colon) {
                    self.pos += 1;
                    let ty = self.type_ref()?;
                    Ok(Term::typed_var(&name, ty))
                } else {
                    Ok(Term::var(&name))
                }
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = vec![self.term()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "\")\"")?;
                    return Ok(Term::compound(&name, args));
                }
                if self.peek() == Some(&Tok::Colon) {
                    self.pos += 1;
                    let iri = self.prefixes.resolve_underscore(&name).unwrap_or(name);
                    return self.typed_constant(TypeRef::new(&iri));
                }
                let resolved = self.prefixes.resolve_underscore(&name).unwrap_or(name);
                Ok(Term::constant(&resolved))
            }
            Tok::Num(n) => Ok(Term::constant(&n)),
            Tok::Str(s) => Ok(Term::constant(&s)),
            Tok::Iri(iri) => {
                if self.peek() == Some(&Tok::Colon) {
                    self.pos += 1;
                    return self.typed_constant(TypeRef::new(&iri));
                }
                Ok(Term::constant(&iri))
            }
            Tok::LBracket => {
                if self.peek() == Some(&Tok::RBracket) {
                    self.pos += 1;
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    items.push(self.term()?);
                }
                let tail = if self.peek() == Some(&Tok::Bar) {
                    self.pos += 1;
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(Tok::RBracket, "\"]\"")?;
                Ok(Term::list(items, tail))
            }
            other => self.fail_prev(format!("expected a term, found \"{other}\"")),
        }
    }

    /// The name after `type:`. Any identifier works here, uppercase included,
    /// since the position leaves no room for a variable.
    fn typed_constant(&mut self, ty: TypeRef) -> Result<Term, ParseError> {
        match self.next("a constant name")? {
            Tok::Ident(s) => {
                let name = self.prefixes.resolve_underscore(&s).unwrap_or(s);
                Ok(Term::typed_constant(&name, ty))
            }
            Tok::Num(n) => Ok(Term::typed_constant(&n, ty)),
            Tok::Str(s) => Ok(Term::typed_constant(&s, ty)),
            Tok::Iri(iri) => Ok(Term::typed_constant(&iri, ty)),
            other => self.fail_prev(format!("expected a constant name, found \"{other}\"")),
        }
    }

    /// A zero-arity atom read back as the constant it lexed from, used when
    /// an infix operator follows.
    fn atom_as_term(&self, a: &Atom) -> Term {
        if a.args.is_empty() {
            let name = self.prefixes.resolve_underscore(&a.pred).unwrap_or_else(|| a.pred.to_string());
            Term::constant(&name)
        } else {
            Term::compound(&a.pred, a.args.clone())
        }
    }
}

fn starts_like_var(name: &str) -> bool {
    name.starts_with(|c: char| c.is_uppercase() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{PrettyExt, Sign, VarKey};

    const VIN: &str = "http://example.org/vocab/vin#";

    fn prefixed() -> Prefixes {
        let mut p = Prefixes::common();
        p.declare("vin", VIN);
        p.declare("math", "http://example.org/vocab/math#");
        p
    }

    #[test]
    fn parses_facts_rules_and_queries() {
        let mut p = Prefixes::common();
        let script = "\
% a small graph
edge(a, b).
edge(b, c).
path(X, Y) :- edge(X, Y).
path(X, Z) :- edge(X, Y), path(Y, Z).
:-solve(path(a, Z)).
:-eval(path(a, Z)).
";
        let parsed = parse_script(script, &mut p).unwrap();
        assert_eq!(parsed.program.clauses.len(), 4);
        assert_eq!(parsed.queries.len(), 2);
        assert!(parsed.queries[0].all_answers);
        assert!(!parsed.queries[1].all_answers);
        assert!(parsed.program.clauses[0].is_fact());
        assert_eq!(parsed.program.clauses[3].body.len(), 2);
    }

    #[test]
    fn typed_terms_resolve_prefixes() {
        let mut p = Prefixes::common();
        let script = r#"
:- prefix(vin, "http://example.org/vocab/vin#").
likes(X:vin_Wine).
price(vin_Wine:vin_Merlot, math_Percentage:10).
"#;
        let parsed = parse_script(script, &mut p).unwrap();
        let likes = &parsed.program.clauses[0];
        let arg = &likes.head.as_ref().unwrap().atom.args[0];
        let v = arg.as_var().unwrap();
        assert_eq!(v.ty, TypeRef::new(&format!("{VIN}Wine")));

        let price = &parsed.program.clauses[1];
        let merlot = price.head.as_ref().unwrap().atom.args[0].as_const().unwrap();
        assert_eq!(&*merlot.name, format!("{VIN}Merlot"));
        assert_eq!(merlot.ty, TypeRef::new(&format!("{VIN}Wine")));
        // math has no declaration in this script, so the token stays raw.
        let ten = price.head.as_ref().unwrap().atom.args[1].as_const().unwrap();
        assert_eq!(&*ten.name, "10");
        assert_eq!(ten.ty, TypeRef::new("math_Percentage"));
    }

    #[test]
    fn directives_are_collected_in_order() {
        let mut p = Prefixes::common();
        let script = r#"
:- prefix(vin, "http://example.org/vocab/vin#").
:- import("http://example.org/ontology/vin.nt").
:- reasoner("rdfs").
:- sort(price(vin_Wine), vin_Dollar).
"#;
        let parsed = parse_script(script, &mut p).unwrap();
        assert_eq!(parsed.directives.len(), 4);
        assert!(matches!(&parsed.directives[1], Directive::Import { url } if url.ends_with("vin.nt")));
        assert!(matches!(&parsed.directives[2], Directive::Reasoner { mode } if mode == "rdfs"));
        match &parsed.directives[3] {
            Directive::SortDecl { functor, arg_types, result } => {
                assert_eq!(functor, "price");
                assert_eq!(arg_types, &[TypeRef::new(&format!("{VIN}Wine"))]);
                assert_eq!(result, &TypeRef::new(&format!("{VIN}Dollar")));
            }
            other => panic!("expected a sort declaration, got {other:?}"),
        }
        assert!(p.is_declared("vin"));
    }

    #[test]
    fn misspelled_solve_is_accepted() {
        let mut p = Prefixes::common();
        let parsed = parse_script(":-sovle(p(X)).", &mut p).unwrap();
        assert_eq!(parsed.queries.len(), 1);
        assert!(parsed.queries[0].all_answers);
    }

    #[test]
    fn unknown_reasoner_mode_is_rejected() {
        let mut p = Prefixes::common();
        let err = parse_script(":- reasoner(\"pellet\").", &mut p).unwrap_err();
        assert!(err.msg.contains("unknown reasoner mode"));
        // Recognized but unsupported modes pass the parser.
        assert!(parse_script(":- reasoner(\"swrl\").", &mut p).is_ok());
    }

    #[test]
    fn negation_forms() {
        let mut p = Prefixes::common();
        let script = "\
silver(X) :- buys(X), not(gold(X)).
neg(broken(tv)).
ok(X) :- not(neg(broken(X))).
";
        let parsed = parse_script(script, &mut p).unwrap();
        let silver = &parsed.program.clauses[0];
        assert!(silver.body[1].naf);
        let neg_fact = &parsed.program.clauses[1];
        assert_eq!(neg_fact.head.as_ref().unwrap().sign, Sign::Neg);
        let ok = &parsed.program.clauses[2];
        assert!(ok.body[0].naf);
        assert_eq!(ok.body[0].sign, Sign::Neg);

        let err = parse_script("p :- not(not(q)).", &mut p).unwrap_err();
        assert!(err.msg.contains("not(not"));
        let err = parse_script("not(q) :- p.", &mut p).unwrap_err();
        assert!(err.msg.contains("head"));
    }

    #[test]
    fn comparisons_parse_infix() {
        let mut p = Prefixes::common();
        let script = "d(X) :- s(X, Y), Y > 10, Y =< 100, X = a.";
        let parsed = parse_script(script, &mut p).unwrap();
        let body = &parsed.program.clauses[0].body;
        assert_eq!(&*body[1].atom.pred, ">");
        assert_eq!(&*body[2].atom.pred, "=<");
        assert_eq!(&*body[3].atom.pred, "=");
        assert_eq!(body[1].atom.args[1], Term::constant("10"));

        let err = parse_script("10 > 5 :- q.", &mut p).unwrap_err();
        assert!(err.msg.contains("cannot head a clause"));
    }

    #[test]
    fn builtins_cannot_be_defined() {
        let mut p = Prefixes::common();
        let err = parse_script("rdf(a, b, c, d, e).", &mut p).unwrap_err();
        assert!(err.msg.contains("built in"));
        // As a body literal it is fine.
        assert!(parse_script("t(S) :- rdf(src, \"rdfs\", S, rdf_type, X).", &mut p).is_ok());
    }

    #[test]
    fn lists_and_anonymous_variables() {
        let mut p = Prefixes::common();
        let parsed = parse_script("p([a, b | T], [], _, _).", &mut p).unwrap();
        let args = &parsed.program.clauses[0].head.as_ref().unwrap().atom.args;
        let (items, tail) = args[0].as_list().unwrap();
        assert_eq!(items.len(), 2);
        assert!(tail.is_some());
        assert_eq!(args[1], Term::nil());
        // Each `_` is a fresh variable.
        assert_ne!(args[2], args[3]);
    }

    #[test]
    fn iri_terms_and_types() {
        let mut p = Prefixes::common();
        let parsed =
            parse_script("p(<http://x#a>, X:<http://x#T>, <http://x#T>:b).", &mut p).unwrap();
        let args = &parsed.program.clauses[0].head.as_ref().unwrap().atom.args;
        assert_eq!(args[0], Term::constant("http://x#a"));
        assert_eq!(args[1].as_var().unwrap().ty, TypeRef::new("http://x#T"));
        let c = args[2].as_const().unwrap();
        assert_eq!(&*c.name, "b");
        assert_eq!(c.ty, TypeRef::new("http://x#T"));
    }

    #[test]
    fn ask_and_bare_goal_directives() {
        let mut p = Prefixes::common();
        let parsed = parse_script("?- p(X).\n:- q(Y).", &mut p).unwrap();
        assert_eq!(parsed.queries.len(), 2);
        assert_eq!(parsed.program.queries.len(), 2);
    }

    #[test]
    fn errors_carry_position() {
        let mut p = Prefixes::common();
        let err = parse_script("p(a).\nq(b) :- .", &mut p).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col > 1);

        let err = parse_script("p(a)", &mut p).unwrap_err();
        assert!(err.msg.contains("end of input"));

        let err = parse_script("p(a@).", &mut p).unwrap_err();
        assert!(err.msg.contains("unexpected character"));
    }

    #[test]
    fn quoted_strings_stay_literal() {
        let p = prefixed();
        let t = parse_term("\"vin_Wine\"", &p).unwrap();
        // Quoted: no prefix resolution.
        assert_eq!(t, Term::constant("vin_Wine"));
        let t = parse_term("vin_Wine", &p).unwrap();
        assert_eq!(t, Term::constant(&format!("{VIN}Wine")));
    }

    #[test]
    fn printing_and_reparsing_round_trips() {
        let mut p = Prefixes::common();
        let script = r#"
:- prefix(vin, "http://example.org/vocab/vin#").
:- prefix(math, "http://example.org/vocab/math#").
edge(a, b).
likes(X:vin_Wine, math_Percentage:10) :- dry(X), not(expensive(X)), X = vin_Merlot.
neg(expensive(vin_Wine:vin_Port)).
serve([X | Rest], "with dinner") :- wine(X), serve(Rest, "with dinner").
big(X) :- size(X, N), N >= 100.
"#;
        let parsed = parse_script(script, &mut p).unwrap();
        for clause in &parsed.program.clauses {
            let printed = clause.pretty(&p).to_string();
            let reparsed = parse_script(&printed, &mut p.clone())
                .unwrap_or_else(|e| panic!("reprinted clause failed to parse: {printed:?}: {e}"));
            assert_eq!(reparsed.program.clauses.len(), 1, "{printed}");
            assert_eq!(&reparsed.program.clauses[0], clause, "{printed}");
        }
    }

    #[test]
    fn goal_parsing_for_the_repl() {
        let p = prefixed();
        let goal = parse_goal("wine(X:vin_Wine), not(red(X))", &p).unwrap();
        assert_eq!(goal.body.len(), 2);
        assert!(goal.head.is_none());
        let goal = parse_goal("wine(X).", &p).unwrap();
        assert_eq!(goal.body.len(), 1);
        assert!(parse_goal("wine(X). extra", &p).is_err());
    }

    #[test]
    fn variables_with_salts_reparse_as_plain_names() {
        let mut p = Prefixes::common();
        let clause = parse_script("p(X) :- q(X, Y).", &mut p).unwrap().program.clauses[0].clone();
        let renamed = clause.rename(3);
        let printed = renamed.pretty(&p).to_string();
        let reparsed = parse_script(&printed, &mut p).unwrap();
        // Renamed variables print as name__salt and read back as ordinary
        // variables; the structure is preserved up to renaming.
        let c = &reparsed.program.clauses[0];
        assert_eq!(c.variables().len(), renamed.variables().len());
        assert_eq!(
            c.head.as_ref().unwrap().atom.args[0],
            Term::var_key(VarKey::new("X__3"), crate::sorts::TypeRef::top())
        );
    }
}
