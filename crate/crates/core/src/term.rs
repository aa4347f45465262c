//! Terms, literals, clauses and their printed form.
//!
//! Terms are prescriptively typed: every variable and constant carries a
//! [`TypeRef`] annotation, where "no annotation" is the top type. Whether two
//! terms unify depends on those annotations, so they are part of term
//! identity and of the printed syntax:
//!
//! ```text
//! X:vin_Wine                 typed variable
//! vin_White_Wine:Chardonnay  typed constant (type before the colon)
//! price(X:vin_Wine)          compound term
//! [a, b | T]                 list sugar for cons/nil
//! ```
//!
//! Compound terms do not store a type; their effective type comes from a
//! function sort declaration in the registry, top if none exists.

use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;
use once_cell::sync::Lazy;

use crate::sorts::{intern, Prefixes, TypeRef};

/// Functor used by list sugar; `[a | T]` reads as `cons(a, T)`.
pub const LIST_CONS: &str = "cons";
/// Constant used by list sugar; `[]` reads as `nil`.
pub const LIST_NIL: &str = "nil";

/// Identity of a variable: source name plus a renaming generation.
///
/// Source variables have `salt` 0; the solver renames clause copies by
/// assigning a fresh salt, which keeps the original name readable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarKey {
    pub name: Arc<str>,
    pub salt: u32,
}

impl VarKey {
    pub fn new(name: &str) -> Self {
        VarKey { name: intern(name), salt: 0 }
    }

    pub fn with_salt(name: &str, salt: u32) -> Self {
        VarKey { name: intern(name), salt }
    }
}

impl fmt::Debug for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.salt == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}__{}", self.name, self.salt)
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Var {
    pub key: VarKey,
    pub ty: TypeRef,
}

/// A constant under the default unique-name assumption: distinct names denote
/// distinct individuals unless the registry links them with sameAs.
///
/// `name` is either a plain token or, for namespace-prefixed constants, the
/// resolved IRI.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Constant {
    pub name: Arc<str>,
    pub ty: TypeRef,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Compound {
    pub functor: Arc<str>,
    pub args: Vec<Term>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Var),
    Const(Constant),
    Compound(Compound),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::typed_var(name, TypeRef::top())
    }

    pub fn typed_var(name: &str, ty: TypeRef) -> Self {
        Term::Var(Var { key: VarKey::new(name), ty })
    }

    pub fn var_key(key: VarKey, ty: TypeRef) -> Self {
        Term::Var(Var { key, ty })
    }

    pub fn constant(name: &str) -> Self {
        Term::typed_constant(name, TypeRef::top())
    }

    pub fn typed_constant(name: &str, ty: TypeRef) -> Self {
        Term::Const(Constant { name: intern(name), ty })
    }

    pub fn compound(functor: &str, args: Vec<Term>) -> Self {
        Term::Compound(Compound { functor: intern(functor), args })
    }

    pub fn nil() -> Self {
        Term::constant(LIST_NIL)
    }

    /// Builds `[items... | tail]`; `tail` of `None` means a proper list.
    pub fn list(items: Vec<Term>, tail: Option<Term>) -> Self {
        let mut acc = tail.unwrap_or_else(Term::nil);
        for item in items.into_iter().rev() {
            acc = Term::compound(LIST_CONS, vec![item, acc]);
        }
        acc
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_const(&self) -> Option<&Constant> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::Compound(c) => c.args.iter().all(Term::is_ground),
        }
    }

    /// Collects variables in first-occurrence order.
    pub fn variables(&self) -> IndexSet<VarKey> {
        let mut out = IndexSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut IndexSet<VarKey>) {
        match self {
            Term::Var(v) => {
                out.insert(v.key.clone());
            }
            Term::Const(_) => {}
            Term::Compound(c) => {
                for a in &c.args {
                    a.collect_vars(out);
                }
            }
        }
    }

    pub fn contains_var(&self, key: &VarKey) -> bool {
        match self {
            Term::Var(v) => &v.key == key,
            Term::Const(_) => false,
            Term::Compound(c) => c.args.iter().any(|a| a.contains_var(key)),
        }
    }

    pub fn contains_compound(&self) -> bool {
        matches!(self, Term::Compound(_))
    }

    /// Stamps `salt` on every variable, preserving annotations.
    pub fn rename(&self, salt: u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(Var {
                key: VarKey { name: Arc::clone(&v.key.name), salt },
                ty: v.ty.clone(),
            }),
            Term::Const(_) => self.clone(),
            Term::Compound(c) => Term::Compound(Compound {
                functor: Arc::clone(&c.functor),
                args: c.args.iter().map(|a| a.rename(salt)).collect(),
            }),
        }
    }

    /// Reads a cons/nil chain back into list shape, if this term is one.
    pub fn as_list(&self) -> Option<(Vec<&Term>, Option<&Term>)> {
        let mut items = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Term::Compound(c) if *c.functor == *LIST_CONS && c.args.len() == 2 => {
                    items.push(&c.args[0]);
                    cur = &c.args[1];
                }
                Term::Const(c) if *c.name == *LIST_NIL && c.ty.is_top() => {
                    return if items.is_empty() { None } else { Some((items, None)) };
                }
                _ => {
                    return if items.is_empty() { None } else { Some((items, Some(cur))) };
                }
            }
        }
    }
}

/// Numeric value of a constant name, used by the comparison builtins.
pub fn numeric_value(name: &str) -> Option<f64> {
    if name.is_empty() || !name.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        return None;
    }
    name.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub(crate) fn is_iri_like(s: &str) -> bool {
    s.contains("://") || s.starts_with("urn:") || s.starts_with("mailto:")
}

pub(crate) fn is_numeric_token(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    if body.is_empty() {
        return false;
    }
    match body.split_once('.') {
        None => body.chars().all(|c| c.is_ascii_digit()),
        Some((int, frac)) => {
            !int.is_empty()
                && !frac.is_empty()
                && int.chars().all(|c| c.is_ascii_digit())
                && frac.chars().all(|c| c.is_ascii_digit())
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Atom {
    pub pred: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: intern(pred), args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn variables(&self) -> IndexSet<VarKey> {
        let mut out = IndexSet::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn rename(&self, salt: u32) -> Atom {
        Atom {
            pred: Arc::clone(&self.pred),
            args: self.args.iter().map(|a| a.rename(salt)).collect(),
        }
    }
}

/// Explicit polarity: `Neg` atoms are written `neg(p(..))` and form their own
/// predicate space, resolving only against `neg`-headed clauses.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

/// A body or head literal: an atom with explicit polarity, optionally under
/// default negation (`not(..)`, bodies only).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Literal {
    pub naf: bool,
    pub sign: Sign,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { naf: false, sign: Sign::Pos, atom }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { naf: false, sign: Sign::Neg, atom }
    }

    pub fn not(mut lit: Literal) -> Self {
        lit.naf = true;
        lit
    }

    pub fn is_ground(&self) -> bool {
        self.atom.is_ground()
    }

    pub fn variables(&self) -> IndexSet<VarKey> {
        self.atom.variables()
    }

    pub fn rename(&self, salt: u32) -> Literal {
        Literal { naf: self.naf, sign: self.sign, atom: self.atom.rename(salt) }
    }
}

/// `head :- body.` A fact has an empty body; a goal has no head.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub head: Option<Literal>,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn fact(head: Literal) -> Self {
        Clause { head: Some(head), body: Vec::new() }
    }

    pub fn rule(head: Literal, body: Vec<Literal>) -> Self {
        Clause { head: Some(head), body }
    }

    pub fn goal(body: Vec<Literal>) -> Self {
        Clause { head: None, body }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn variables(&self) -> IndexSet<VarKey> {
        let mut out = IndexSet::new();
        if let Some(h) = &self.head {
            for a in &h.atom.args {
                a.collect_vars(&mut out);
            }
        }
        for l in &self.body {
            for a in &l.atom.args {
                a.collect_vars(&mut out);
            }
        }
        out
    }

    pub fn rename(&self, salt: u32) -> Clause {
        Clause {
            head: self.head.as_ref().map(|h| h.rename(salt)),
            body: self.body.iter().map(|l| l.rename(salt)).collect(),
        }
    }
}

/// A rulebase plus the queries embedded in its source, in source order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub queries: Vec<Clause>,
}

impl Program {
    pub fn is_function_free(&self) -> bool {
        let no_compound = |c: &Clause| {
            c.head
                .iter()
                .flat_map(|h| h.atom.args.iter())
                .chain(c.body.iter().flat_map(|l| l.atom.args.iter()))
                .all(|t| !has_compound(t))
        };
        self.clauses.iter().all(no_compound) && self.queries.iter().all(no_compound)
    }
}

fn has_compound(t: &Term) -> bool {
    match t {
        Term::Compound(_) => true,
        _ => false,
    }
}

static COMMON: Lazy<Prefixes> = Lazy::new(Prefixes::common);

/// Display adapter that shortens IRIs through a prefix table.
pub struct Pretty<'a, T: ?Sized> {
    item: &'a T,
    prefixes: &'a Prefixes,
}

pub trait PrettyExt {
    fn pretty<'a>(&'a self, prefixes: &'a Prefixes) -> Pretty<'a, Self> {
        Pretty { item: self, prefixes }
    }
}

impl PrettyExt for Term {}
impl PrettyExt for Atom {}
impl PrettyExt for Literal {}
impl PrettyExt for Clause {}
impl PrettyExt for Program {}
impl PrettyExt for TypeRef {}

fn fmt_type(ty: &TypeRef, p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p.shorten_underscore(ty.iri()) {
        Some(short) => write!(f, "{short}"),
        None => write!(f, "<{}>", ty.iri()),
    }
}

/// Prints a constant name so the parser reads the same constant back:
/// IRIs shorten to a prefixed token or `<...>`, numbers stay bare, safe
/// idents stay bare, everything else is quoted. `typed_pos` relaxes the
/// lowercase-initial requirement, since after `type:` any ident is a name.
fn fmt_const_name(name: &str, p: &Prefixes, typed_pos: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_iri_like(name) {
        return match p.shorten_underscore(name) {
            Some(short) => write!(f, "{short}"),
            None => write!(f, "<{name}>"),
        };
    }
    if is_numeric_token(name) {
        return write!(f, "{name}");
    }
    let reinterpreted = name
        .split_once('_')
        .map(|(a, _)| p.is_declared(a))
        .unwrap_or(false);
    let case_ok = typed_pos || name.starts_with(|c: char| c.is_lowercase());
    if is_ident(name) && case_ok && !reinterpreted && name != "_" {
        write!(f, "{name}")
    } else {
        write!(f, "\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

impl fmt::Display for Pretty<'_, TypeRef> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(self.item, self.prefixes, f)
    }
}

impl fmt::Display for Pretty<'_, Term> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self.item, self.prefixes, f)
    }
}

fn fmt_term(t: &Term, p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(v) => {
            write!(f, "{:?}", v.key)?;
            if !v.ty.is_top() {
                write!(f, ":")?;
                fmt_type(&v.ty, p, f)?;
            }
            Ok(())
        }
        Term::Const(c) => {
            if c.ty.is_top() {
                fmt_const_name(&c.name, p, false, f)
            } else {
                fmt_type(&c.ty, p, f)?;
                write!(f, ":")?;
                fmt_const_name(&c.name, p, true, f)
            }
        }
        Term::Compound(_) => {
            if let Some((items, tail)) = t.as_list() {
                write!(f, "[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt_term(item, p, f)?;
                }
                if let Some(tail) = tail {
                    write!(f, " | ")?;
                    fmt_term(tail, p, f)?;
                }
                return write!(f, "]");
            }
            let Term::Compound(c) = t else { unreachable!() };
            write!(f, "{}(", c.functor)?;
            for (i, a) in c.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_term(a, p, f)?;
            }
            write!(f, ")")
        }
    }
}

pub(crate) const COMPARISON_PREDS: [&str; 5] = [">", "<", ">=", "=<", "="];

impl fmt::Display for Pretty<'_, Atom> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_atom(self.item, self.prefixes, f)
    }
}

fn fmt_atom(a: &Atom, p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if a.args.len() == 2 && COMPARISON_PREDS.contains(&&*a.pred) {
        fmt_term(&a.args[0], p, f)?;
        write!(f, " {} ", a.pred)?;
        return fmt_term(&a.args[1], p, f);
    }
    write!(f, "{}", a.pred)?;
    if !a.args.is_empty() {
        write!(f, "(")?;
        for (i, t) in a.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            fmt_term(t, p, f)?;
        }
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Pretty<'_, Literal> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_literal(self.item, self.prefixes, f)
    }
}

fn fmt_literal(l: &Literal, p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if l.naf {
        write!(f, "not(")?;
    }
    if l.sign == Sign::Neg {
        write!(f, "neg(")?;
        fmt_atom(&l.atom, p, f)?;
        write!(f, ")")?;
    } else {
        fmt_atom(&l.atom, p, f)?;
    }
    if l.naf {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Pretty<'_, Clause> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_clause(self.item, self.prefixes, f)
    }
}

fn fmt_clause(c: &Clause, p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match (&c.head, c.body.is_empty()) {
        (Some(h), true) => {
            fmt_literal(h, p, f)?;
            write!(f, ".")
        }
        (Some(h), false) => {
            fmt_literal(h, p, f)?;
            write!(f, " :- ")?;
            fmt_body(&c.body, p, f)?;
            write!(f, ".")
        }
        (None, _) => {
            write!(f, ":- ")?;
            fmt_body(&c.body, p, f)?;
            write!(f, ".")
        }
    }
}

fn fmt_body(body: &[Literal], p: &Prefixes, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, l) in body.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        fmt_literal(l, p, f)?;
    }
    Ok(())
}

impl fmt::Display for Pretty<'_, Program> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.item.clauses {
            fmt_clause(c, self.prefixes, f)?;
            writeln!(f)?;
        }
        for q in &self.item.queries {
            write!(f, ":-solve(")?;
            fmt_body(&q.body, self.prefixes, f)?;
            writeln!(f, ").")?;
        }
        Ok(())
    }
}

macro_rules! plain_display {
    ($($ty:ty),*) => {$(
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.pretty(&COMMON))
            }
        }
    )*};
}

plain_display!(Term, Atom, Literal, Clause, Program);
