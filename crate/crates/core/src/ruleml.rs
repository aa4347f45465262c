//! RuleML import and export for the typed rule dialect.
//!
//! The recognized element set is deliberately small: `Implies` with `head`
//! and `body`, `Atom` holding a `Rel` and argument terms, `Var` and `Ind`
//! (both taking an optional `type` attribute), `And` for body conjunctions,
//! `Naf` and `Neg` for the two negations, and `Expr`/`Fun` for function
//! terms. A document root of `RuleML` or `Assert` wraps any number of
//! clauses; a bare clause element is accepted too.
//!
//! `type` attributes hold QNames (`vin:WhiteWine`) resolved against the
//! shared prefix table, mirroring the script syntax's `vin_WhiteWine`. `Ind`
//! text is treated the same way: a `prefix:Local` form whose prefix is
//! declared resolves to the full IRI, anything else (numbers, plain names,
//! raw IRIs) is kept verbatim. Export shortens IRIs back to QNames when a
//! declared prefix matches, so import of an export reproduces the original
//! program structurally. Queries are not part of the dialect; only clauses
//! travel.

use std::fmt::Write as _;
use std::sync::Arc;

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use crate::sorts::{Prefixes, TypeRef};
use crate::term::{Atom, Clause, Literal, Program, Sign, Term, VarKey};

#[derive(Debug, Error)]
pub enum RuleMlError {
    #[error("malformed xml: {0}")]
    Xml(String),
    #[error("unknown element <{0}>")]
    UnknownElement(String),
    #[error("<{0}> is missing {1}")]
    Missing(&'static str, &'static str),
    #[error("unexpected content in <{0}>: {1}")]
    Unexpected(&'static str, String),
    #[error("unresolvable type qname \"{0}\"")]
    UnresolvableQName(String),
}

/// A tiny DOM: the dialect is small enough that building the tree first
/// keeps the mapping code free of streaming concerns.
struct El {
    name: String,
    type_attr: Option<String>,
    children: Vec<El>,
    text: String,
}

fn parse_dom(xml: &str) -> Result<El, RuleMlError> {
    let mut reader = Reader::from_str(xml);
    // Text fragments accumulate raw; entity references split them, so any
    // trimming happens where names are read out.
    reader.config_mut().expand_empty_elements = true;

    let mut stack: Vec<El> = vec![El {
        name: String::new(),
        type_attr: None,
        children: Vec::new(),
        text: String::new(),
    }];
    loop {
        match reader.read_event().map_err(|e| RuleMlError::Xml(e.to_string()))? {
            Event::Start(start) => {
                let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
                let mut type_attr = None;
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| RuleMlError::Xml(e.to_string()))?;
                    if attr.key.as_ref() == b"type" {
                        let value = attr
                            .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                            .map_err(|e| RuleMlError::Xml(e.to_string()))?;
                        type_attr = Some(value.into_owned());
                    }
                }
                stack.push(El { name, type_attr, children: Vec::new(), text: String::new() });
            }
            Event::End(_) => {
                let done = stack.pop().expect("reader balances tags");
                stack.last_mut().expect("root stays").children.push(done);
            }
            Event::Text(t) => {
                let text = t.xml10_content().map_err(|e| RuleMlError::Xml(e.to_string()))?;
                let top = stack.last_mut().expect("root stays");
                top.text.push_str(&text);
            }
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::CData(c) => {
                let text = String::from_utf8_lossy(&c).into_owned();
                stack.last_mut().expect("root stays").text.push_str(&text);
            }
            Event::Empty(_) => unreachable!("expand_empty_elements is on"),
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(c)) => c,
                    _ => match r.decode().as_deref() {
                        Ok("amp") => '&',
                        Ok("lt") => '<',
                        Ok("gt") => '>',
                        Ok("quot") => '"',
                        Ok("apos") => '\'',
                        _ => {
                            return Err(RuleMlError::Xml(format!(
                                "unsupported entity &{};",
                                String::from_utf8_lossy(&r)
                            )));
                        }
                    },
                };
                stack.last_mut().expect("root stays").text.push(resolved);
            }
        }
    }
    let mut root = stack.pop().expect("root stays");
    if stack.is_empty() && root.children.len() == 1 && root.name.is_empty() {
        return Ok(root.children.pop().unwrap());
    }
    Err(RuleMlError::Xml("expected exactly one root element".into()))
}

/// Reads a RuleML document into a program of clauses.
pub fn import_ruleml(xml: &str, prefixes: &Prefixes) -> Result<Program, RuleMlError> {
    let root = parse_dom(xml)?;
    let mut clauses = Vec::new();
    match root.name.as_str() {
        "RuleML" | "Assert" => {
            for child in &root.children {
                clauses.push(clause_from(child, prefixes)?);
            }
        }
        "Implies" | "Atom" | "Neg" => clauses.push(clause_from(&root, prefixes)?),
        other => return Err(RuleMlError::UnknownElement(other.to_string())),
    }
    Ok(Program { clauses, queries: Vec::new() })
}

fn clause_from(el: &El, prefixes: &Prefixes) -> Result<Clause, RuleMlError> {
    match el.name.as_str() {
        "Atom" | "Neg" => Ok(Clause::fact(head_literal_from(el, prefixes)?)),
        "Implies" => {
            let mut head = None;
            let mut body = None;
            for child in &el.children {
                match child.name.as_str() {
                    "head" => head = Some(child),
                    "body" => body = Some(child),
                    other => return Err(RuleMlError::UnknownElement(other.to_string())),
                }
            }
            let head = head.ok_or(RuleMlError::Missing("Implies", "a <head>"))?;
            let [inner] = head.children.as_slice() else {
                return Err(RuleMlError::Missing("head", "exactly one literal"));
            };
            let head_lit = head_literal_from(inner, prefixes)?;
            let body_lits = match body {
                None => Vec::new(),
                Some(body) => {
                    let [inner] = body.children.as_slice() else {
                        return Err(RuleMlError::Missing("body", "exactly one element"));
                    };
                    if inner.name == "And" {
                        inner
                            .children
                            .iter()
                            .map(|c| body_literal_from(c, prefixes))
                            .collect::<Result<_, _>>()?
                    } else {
                        vec![body_literal_from(inner, prefixes)?]
                    }
                }
            };
            Ok(if body_lits.is_empty() {
                Clause::fact(head_lit)
            } else {
                Clause::rule(head_lit, body_lits)
            })
        }
        other => Err(RuleMlError::UnknownElement(other.to_string())),
    }
}

/// `Atom` or `Neg`-wrapped `Atom`; naf cannot head a clause.
fn head_literal_from(el: &El, prefixes: &Prefixes) -> Result<Literal, RuleMlError> {
    match el.name.as_str() {
        "Atom" => Ok(Literal::pos(atom_from(el, prefixes)?)),
        "Neg" => {
            let [inner] = el.children.as_slice() else {
                return Err(RuleMlError::Missing("Neg", "exactly one <Atom>"));
            };
            Ok(Literal::neg(atom_from(inner, prefixes)?))
        }
        other => Err(RuleMlError::UnknownElement(other.to_string())),
    }
}

fn body_literal_from(el: &El, prefixes: &Prefixes) -> Result<Literal, RuleMlError> {
    match el.name.as_str() {
        "Naf" => {
            let [inner] = el.children.as_slice() else {
                return Err(RuleMlError::Missing("Naf", "exactly one literal"));
            };
            Ok(Literal::not(head_literal_from(inner, prefixes)?))
        }
        _ => head_literal_from(el, prefixes),
    }
}

fn atom_from(el: &El, prefixes: &Prefixes) -> Result<Atom, RuleMlError> {
    let mut children = el.children.iter();
    let rel = children.next().ok_or(RuleMlError::Missing("Atom", "a <Rel>"))?;
    if rel.name != "Rel" {
        return Err(RuleMlError::Missing("Atom", "a <Rel> as first child"));
    }
    let pred = rel.text.trim();
    if pred.is_empty() {
        return Err(RuleMlError::Missing("Rel", "a predicate name"));
    }
    let args = children
        .map(|c| term_from(c, prefixes))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(pred, args))
}

fn term_from(el: &El, prefixes: &Prefixes) -> Result<Term, RuleMlError> {
    match el.name.as_str() {
        "Var" => {
            let name = el.text.trim();
            if name.is_empty() {
                return Err(RuleMlError::Missing("Var", "a name"));
            }
            match type_of(el, prefixes)? {
                Some(ty) => Ok(Term::typed_var(name, ty)),
                None => Ok(Term::var(name)),
            }
        }
        "Ind" => {
            let name = resolve_ind_text(el.text.trim(), prefixes);
            match type_of(el, prefixes)? {
                Some(ty) => Ok(Term::typed_constant(&name, ty)),
                None => Ok(Term::constant(&name)),
            }
        }
        "Expr" => {
            let mut children = el.children.iter();
            let fun = children.next().ok_or(RuleMlError::Missing("Expr", "a <Fun>"))?;
            let fun_name = fun.text.trim();
            if fun.name != "Fun" || fun_name.is_empty() {
                return Err(RuleMlError::Missing("Expr", "a named <Fun> as first child"));
            }
            let args = children
                .map(|c| term_from(c, prefixes))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::compound(fun_name, args))
        }
        other => Err(RuleMlError::UnknownElement(other.to_string())),
    }
}

fn type_of(el: &El, prefixes: &Prefixes) -> Result<Option<TypeRef>, RuleMlError> {
    let Some(value) = &el.type_attr else { return Ok(None) };
    if value.contains("://") {
        return Ok(Some(TypeRef::new(value)));
    }
    match prefixes.resolve_qname(value) {
        Some(iri) => Ok(Some(TypeRef::new(&iri))),
        None => Err(RuleMlError::UnresolvableQName(value.clone())),
    }
}

/// `prefix:Local` with a declared prefix becomes the full IRI; everything
/// else is taken verbatim.
fn resolve_ind_text(text: &str, prefixes: &Prefixes) -> String {
    if !text.contains("://") {
        if let Some(iri) = prefixes.resolve_qname(text) {
            return iri;
        }
    }
    text.to_string()
}

/// Writes the program's clauses as an indented RuleML document.
pub fn export_ruleml(program: &Program, prefixes: &Prefixes) -> String {
    let mut out = String::from("<RuleML>\n");
    for clause in &program.clauses {
        let Some(head) = &clause.head else { continue };
        if clause.body.is_empty() {
            write_literal(&mut out, head, prefixes, 1);
        } else {
            out.push_str("  <Implies>\n    <head>\n");
            write_literal(&mut out, head, prefixes, 3);
            out.push_str("    </head>\n    <body>\n");
            if let [only] = clause.body.as_slice() {
                write_literal(&mut out, only, prefixes, 3);
            } else {
                out.push_str("      <And>\n");
                for lit in &clause.body {
                    write_literal(&mut out, lit, prefixes, 4);
                }
                out.push_str("      </And>\n");
            }
            out.push_str("    </body>\n  </Implies>\n");
        }
    }
    out.push_str("</RuleML>\n");
    out
}

fn write_literal(out: &mut String, lit: &Literal, prefixes: &Prefixes, depth: usize) {
    let pad = "  ".repeat(depth);
    let mut close = Vec::new();
    let mut inner = depth;
    if lit.naf {
        let _ = writeln!(out, "{}<Naf>", "  ".repeat(inner));
        close.push("Naf");
        inner += 1;
    }
    if lit.sign == Sign::Neg {
        let _ = writeln!(out, "{}<Neg>", "  ".repeat(inner));
        close.push("Neg");
        inner += 1;
    }
    write_atom(out, &lit.atom, prefixes, inner);
    for name in close.iter().rev() {
        inner -= 1;
        let _ = writeln!(out, "{}</{name}>", "  ".repeat(inner));
    }
    debug_assert!(out.contains(pad.as_str()));
}

fn write_atom(out: &mut String, atom: &Atom, prefixes: &Prefixes, depth: usize) {
    let pad = "  ".repeat(depth);
    let _ = writeln!(out, "{pad}<Atom>");
    let _ = writeln!(out, "{pad}  <Rel>{}</Rel>", escape(&atom.pred));
    for arg in &atom.args {
        write_term(out, arg, prefixes, depth + 1);
    }
    let _ = writeln!(out, "{pad}</Atom>");
}

fn write_term(out: &mut String, term: &Term, prefixes: &Prefixes, depth: usize) {
    let pad = "  ".repeat(depth);
    match term {
        Term::Var(v) => {
            let name = var_display(&v.key);
            match type_attr(&v.ty, prefixes) {
                Some(ty) => {
                    let _ = writeln!(out, "{pad}<Var type=\"{}\">{}</Var>", ty, escape(&name));
                }
                None => {
                    let _ = writeln!(out, "{pad}<Var>{}</Var>", escape(&name));
                }
            }
        }
        Term::Const(c) => {
            let name = shorten_name(&c.name, prefixes);
            match type_attr(&c.ty, prefixes) {
                Some(ty) => {
                    let _ = writeln!(out, "{pad}<Ind type=\"{}\">{}</Ind>", ty, escape(&name));
                }
                None => {
                    let _ = writeln!(out, "{pad}<Ind>{}</Ind>", escape(&name));
                }
            }
        }
        Term::Compound(c) => {
            let _ = writeln!(out, "{pad}<Expr>");
            let _ = writeln!(out, "{pad}  <Fun>{}</Fun>", escape(&c.functor));
            for arg in &c.args {
                write_term(out, arg, prefixes, depth + 1);
            }
            let _ = writeln!(out, "{pad}</Expr>");
        }
    }
}

fn var_display(key: &VarKey) -> String {
    if key.salt == 0 {
        key.name.to_string()
    } else {
        format!("{}__{}", key.name, key.salt)
    }
}

fn type_attr(ty: &TypeRef, prefixes: &Prefixes) -> Option<String> {
    if ty.is_top() {
        return None;
    }
    Some(match prefixes.shorten_qname(ty.iri()) {
        Some(qname) => escape(&qname),
        None => escape(ty.iri()),
    })
}

fn shorten_name(name: &Arc<str>, prefixes: &Prefixes) -> String {
    match prefixes.shorten_qname(name) {
        Some(qname) => qname,
        None => name.to_string(),
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
