//! Type references and namespace plumbing.
//!
//! A `TypeRef` names an ontology class by IRI. The lattice endpoints are
//! `owl:Resource` (top, also the type of everything written without an
//! annotation) and `owl:Nothing` (bottom, the empty type). Everything else
//! about a type (subsumption, instances, equivalence) is answered by a
//! [`TypeRegistry`](crate::registry::TypeRegistry); a `TypeRef` itself is
//! just an interned name, so terms stay meaningful without a registry.

use std::collections::HashSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;

/// IRIs of the vocabulary terms the engine recognizes.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_SUBCLASSOF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_EQUIVALENT_CLASS: &str = "http://www.w3.org/2002/07/owl#equivalentClass";
    pub const OWL_DISJOINT_WITH: &str = "http://www.w3.org/2002/07/owl#disjointWith";
    pub const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
    pub const OWL_NAMED_INDIVIDUAL: &str = "http://www.w3.org/2002/07/owl#NamedIndividual";
    /// Maximum class: every type is a subtype of it, every individual an instance.
    pub const TOP: &str = "http://www.w3.org/2002/07/owl#Resource";
    /// Minimum class: subtype of everything, no instances.
    pub const BOTTOM: &str = "http://www.w3.org/2002/07/owl#Nothing";

    pub const RDF_BASE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS_BASE: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL_BASE: &str = "http://www.w3.org/2002/07/owl#";
}

static INTERNER: Lazy<Mutex<HashSet<Arc<str>>>> = Lazy::new(|| Mutex::new(HashSet::new()));

/// Returns a shared copy of `s`, reusing one allocation per distinct string.
pub(crate) fn intern(s: &str) -> Arc<str> {
    let mut set = INTERNER.lock().unwrap();
    if let Some(hit) = set.get(s) {
        return Arc::clone(hit);
    }
    let arc: Arc<str> = Arc::from(s);
    set.insert(Arc::clone(&arc));
    arc
}

/// An interned reference to an ontology class.
///
/// Equality is by IRI. `TypeRef::top()` stands in for "no annotation".
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeRef {
    iri: Arc<str>,
}

impl TypeRef {
    pub fn new(iri: &str) -> Self {
        TypeRef { iri: intern(iri) }
    }

    pub fn top() -> Self {
        TypeRef::new(vocab::TOP)
    }

    pub fn bottom() -> Self {
        TypeRef::new(vocab::BOTTOM)
    }

    pub fn iri(&self) -> &str {
        &self.iri
    }

    pub fn is_top(&self) -> bool {
        *self.iri == *vocab::TOP
    }

    pub fn is_bottom(&self) -> bool {
        *self.iri == *vocab::BOTTOM
    }
}

impl fmt::Debug for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.iri)
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.iri)
    }
}

/// Prefix table mapping abbreviations to IRI bases.
///
/// Scripts write types and namespaced constants as `abbrev_Local`; the first
/// underscore splits the abbreviation from the local name. The same table
/// drives shortening on output and QName resolution in RuleML documents,
/// where the colon form `abbrev:Local` is used instead.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefixes {
    map: indexmap::IndexMap<String, String>,
}

impl Prefixes {
    pub fn empty() -> Self {
        Prefixes::default()
    }

    /// Table with the rdf, rdfs and owl prefixes predeclared.
    pub fn common() -> Self {
        let mut p = Prefixes::default();
        p.declare("rdf", vocab::RDF_BASE);
        p.declare("rdfs", vocab::RDFS_BASE);
        p.declare("owl", vocab::OWL_BASE);
        p
    }

    /// Declares `abbrev` to stand for `base`. Redeclaring replaces the base.
    pub fn declare(&mut self, abbrev: &str, base: &str) {
        self.map.insert(abbrev.to_string(), base.to_string());
    }

    pub fn base(&self, abbrev: &str) -> Option<&str> {
        self.map.get(abbrev).map(String::as_str)
    }

    pub fn is_declared(&self, abbrev: &str) -> bool {
        self.map.contains_key(abbrev)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Resolves an underscore token like `vin_White_Wine` against the table.
    ///
    /// Only the part before the first underscore is tried as an abbreviation;
    /// returns `None` when the token has no underscore or the abbreviation is
    /// not declared.
    pub fn resolve_underscore(&self, token: &str) -> Option<String> {
        let (abbrev, local) = token.split_once('_')?;
        let base = self.base(abbrev)?;
        Some(format!("{base}{local}"))
    }

    /// Resolves a QName like `vin:White_Wine`.
    pub fn resolve_qname(&self, qname: &str) -> Option<String> {
        let (abbrev, local) = qname.split_once(':')?;
        let base = self.base(abbrev)?;
        Some(format!("{base}{local}"))
    }

    /// Shortens an IRI to `abbrev_Local` form if some declared base matches.
    ///
    /// The longest matching base wins; ties go to the abbreviation declared
    /// first so output stays deterministic.
    pub fn shorten_underscore(&self, iri: &str) -> Option<String> {
        self.best_match(iri)
            .map(|(abbrev, local)| format!("{abbrev}_{local}"))
    }

    /// Shortens an IRI to `abbrev:Local` QName form.
    pub fn shorten_qname(&self, iri: &str) -> Option<String> {
        self.best_match(iri)
            .map(|(abbrev, local)| format!("{abbrev}:{local}"))
    }

    fn best_match<'a>(&'a self, iri: &'a str) -> Option<(&'a str, &'a str)> {
        let mut best: Option<(&str, &str)> = None;
        for (abbrev, base) in self.iter() {
            if let Some(local) = iri.strip_prefix(base) {
                if local.is_empty() || !local.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    continue;
                }
                match best {
                    Some((_, cur)) if cur.len() <= local.len() => {}
                    _ => best = Some((abbrev, local)),
                }
            }
        }
        best
    }
}
