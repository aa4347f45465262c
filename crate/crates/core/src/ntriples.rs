//! Line-based N-Triples reader.
//!
//! Handles the shapes ontology snapshots actually use: IRI refs, blank node
//! labels, literals with optional datatype or language tag, `#` comments.
//! Anything else is a parse error with its line number. This is the only
//! ontology input format; RDF/XML files must be converted first.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::sorts::intern;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Node {
    Iri(Arc<str>),
    Blank(Arc<str>),
    /// Lexical form only; datatype and language tags are dropped.
    Literal(Arc<str>),
}

impl Node {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Node::Iri(s) => Some(s),
            _ => None,
        }
    }

    /// Key used when a node has to act like a constant name: IRIs and
    /// literals by their text, blanks by their label.
    pub fn name(&self) -> &str {
        match self {
            Node::Iri(s) | Node::Blank(s) | Node::Literal(s) => s,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Iri(s) => write!(f, "<{s}>"),
            Node::Blank(s) => write!(f, "_:{s}"),
            Node::Literal(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Triple {
    pub subject: Node,
    pub predicate: Node,
    pub object: Node,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {msg}")]
pub struct NtError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, NtError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut p = LineParser { rest: line, line: line_no };
        let subject = p.node()?;
        let predicate = p.node()?;
        let object = p.node()?;
        p.skip_ws();
        if !p.rest.starts_with('.') {
            return Err(p.err("expected '.' after object"));
        }
        p.rest = &p.rest[1..];
        p.skip_ws();
        if !p.rest.is_empty() && !p.rest.starts_with('#') {
            return Err(p.err("trailing content after '.'"));
        }
        if matches!(predicate, Node::Literal(_)) {
            return Err(NtError { line: line_no, msg: "literal in predicate position".into() });
        }
        out.push(Triple { subject, predicate, object });
    }
    Ok(out)
}

struct LineParser<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, msg: &str) -> NtError {
        NtError { line: self.line, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn node(&mut self) -> Result<Node, NtError> {
        self.skip_ws();
        if let Some(body) = self.rest.strip_prefix('<') {
            let end = body.find('>').ok_or_else(|| self.err("unterminated IRI"))?;
            let iri = &body[..end];
            if iri.is_empty() {
                return Err(self.err("empty IRI"));
            }
            self.rest = &body[end + 1..];
            return Ok(Node::Iri(intern(iri)));
        }
        if let Some(body) = self.rest.strip_prefix("_:") {
            let end = body
                .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-'))
                .unwrap_or(body.len());
            if end == 0 {
                return Err(self.err("empty blank node label"));
            }
            self.rest = &body[end..];
            return Ok(Node::Blank(intern(&body[..end])));
        }
        if let Some(body) = self.rest.strip_prefix('"') {
            let mut value = String::new();
            let mut chars = body.char_indices();
            loop {
                let (i, c) = chars.next().ok_or_else(|| self.err("unterminated literal"))?;
                match c {
                    '"' => {
                        self.rest = &body[i + 1..];
                        break;
                    }
                    '\\' => {
                        let (_, esc) = chars.next().ok_or_else(|| self.err("dangling escape"))?;
                        value.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            'r' => '\r',
                            '"' => '"',
                            '\\' => '\\',
                            other => return Err(self.err(&format!("unknown escape \\{other}"))),
                        });
                    }
                    other => value.push(other),
                }
            }
            // Optional datatype or language tag, dropped.
            if let Some(body) = self.rest.strip_prefix("^^<") {
                let end = body.find('>').ok_or_else(|| self.err("unterminated datatype IRI"))?;
                self.rest = &body[end + 1..];
            } else if let Some(body) = self.rest.strip_prefix('@') {
                let end = body
                    .find(|c: char| !(c.is_alphanumeric() || c == '-'))
                    .unwrap_or(body.len());
                self.rest = &body[end..];
            }
            return Ok(Node::Literal(intern(&value)));
        }
        Err(self.err("expected IRI, blank node, or literal"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_node_kinds() {
        let text = r#"
# taxonomy snippet
<http://x/A> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/B> .
<http://x/i> <http://x/label> "red wine"@en .
_:b0 <http://x/p> "1.5"^^<http://www.w3.org/2001/XMLSchema#decimal> .
"#;
        let triples = parse_ntriples(text).unwrap();
        assert_eq!(triples.len(), 3);
        assert_eq!(triples[0].subject, Node::Iri(intern("http://x/A")));
        assert_eq!(triples[1].object, Node::Literal(intern("red wine")));
        assert_eq!(triples[2].subject, Node::Blank(intern("b0")));
        assert_eq!(triples[2].object, Node::Literal(intern("1.5")));
    }

    #[test]
    fn empty_input_is_no_triples() {
        assert_eq!(parse_ntriples("").unwrap(), vec![]);
        assert_eq!(parse_ntriples("# only a comment\n\n").unwrap(), vec![]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_ntriples("<http://x/A> <http://x/p> <http://x/B> .\n<http://x/A> nonsense").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_ntriples("<http://x/A> <http://x/p> <http://x/B>").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.msg.contains("'.'"));
    }

    #[test]
    fn escapes_in_literals() {
        let triples = parse_ntriples(r#"<http://x/a> <http://x/p> "a\"b\\c" ."#).unwrap();
        assert_eq!(triples[0].object, Node::Literal(intern("a\"b\\c")));
    }
}
