//! The type registry: an ontology snapshot answering typing questions.
//!
//! Loading N-Triples content populates a taxonomy (rdfs:subClassOf,
//! owl:equivalentClass, owl:disjointWith), an A-Box (rdf:type, owl:sameAs)
//! and a raw triple store. After every load the subsumption closure is
//! re-materialized; queries then run against frozen data, so a registry
//! shared behind `&` is safe to query from several solves at once.
//!
//! The closure is reflexive and transitive, cycles through subClassOf
//! collapse into equivalence classes, and bottom <= every class <= top
//! holds without being stored. The `reasoner` level selects how much of the
//! closure queries may see: `Empty` only asserted edges, `Transitive` adds
//! the subClassOf closure, `Full` (rdfs and up) adds equivalence and sameAs.
//!
//! Every subsumption or instance query answered bumps an atomic counter,
//! which is how tests pin down query budgets: `lower` never costs more than
//! two subsumption queries, and fully untyped unification costs none.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::ntriples::{parse_ntriples, Node, NtError, Triple};
use crate::sorts::{intern, vocab, Prefixes, TypeRef};

/// How much inference queries see. Parsed from the reasoner directive.
/// Variant order is significant: levels compare by strength.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReasonerLevel {
    /// Asserted axioms only ("" or "empty").
    Empty,
    /// Plus the transitive closure of subClassOf ("transitive").
    Transitive,
    /// Plus equivalence, sameAs and instance propagation ("rdfs", "owl", "dl").
    Full,
}

/// Modes that parse but have no executable semantics here.
pub const UNSUPPORTED_REASONERS: [&str; 6] =
    ["daml", "swrl", "rdfs_full", "rdfs_simple", "owl_mini", "owl_micro"];

/// Every mode name the reasoner directive accepts syntactically.
pub fn known_reasoner_mode(mode: &str) -> bool {
    matches!(mode, "" | "empty" | "transitive" | "rdfs" | "owl" | "dl")
        || UNSUPPORTED_REASONERS.contains(&mode)
}

impl ReasonerLevel {
    /// Maps a directive mode to a level; recognized-but-unsupported modes
    /// are an error here, unknown modes belong to the parser.
    pub fn from_mode(mode: &str) -> Result<Self, RegistryError> {
        match mode {
            "" | "empty" => Ok(ReasonerLevel::Empty),
            "transitive" => Ok(ReasonerLevel::Transitive),
            "rdfs" | "owl" | "dl" => Ok(ReasonerLevel::Full),
            m if UNSUPPORTED_REASONERS.contains(&m) => {
                Err(RegistryError::UnsupportedReasoner(m.to_string()))
            }
            m => Err(RegistryError::UnsupportedReasoner(m.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSort {
    pub arg_types: Vec<TypeRef>,
    pub result: TypeRef,
}

/// What one load contributed: distinct classes and individuals mentioned by
/// recognized axioms, and how many axioms were recognized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub classes: usize,
    pub individuals: usize,
    pub axioms: usize,
    pub triples: usize,
}

impl fmt::Display for LoadReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} classes, {} individuals, {} axioms ({} triples)",
            self.classes, self.individuals, self.axioms, self.triples
        )
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("ontology {origin}: {err}")]
    Parse { origin: String, err: NtError },
    #[error("cannot read {path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("unknown type <{0}>")]
    UnknownType(String),
    #[error("registry is frozen; loads and declarations are no longer allowed")]
    Frozen,
    #[error("classes <{0}> and <{1}> are declared disjoint but have become equivalent")]
    DisjointEquivalent(String, String),
    #[error("individual <{individual}> is an instance of disjoint classes <{a}> and <{b}>")]
    DisjointInstance { individual: String, a: String, b: String },
    #[error("function sort for {functor}/{arity} conflicts with an earlier declaration")]
    ConflictingFunctionSort { functor: String, arity: usize },
    #[error("reasoner mode \"{0}\" is recognized but not supported by this engine")]
    UnsupportedReasoner(String),
}

type ClassId = usize;

#[derive(Default)]
struct Closure {
    /// Reflexive-transitive reachability over subclass + equivalence edges.
    reach_full: Vec<Vec<bool>>,
    /// Reflexive-transitive reachability over subclass edges alone.
    reach_trans: Vec<Vec<bool>>,
    /// Smallest mutually-reachable class id, the equivalence representative.
    rep: Vec<ClassId>,
    /// Canonical member (lexicographic minimum) of each sameAs cell.
    same_rep: HashMap<Arc<str>, Arc<str>>,
}

pub struct TypeRegistry {
    prefixes: Prefixes,
    level: ReasonerLevel,
    frozen: bool,
    queries: AtomicU64,

    classes: IndexMap<Arc<str>, ClassId>,
    subclass_edges: IndexSet<(ClassId, ClassId)>,
    equiv_edges: IndexSet<(ClassId, ClassId)>,
    disjoint_pairs: IndexSet<(ClassId, ClassId)>,
    instance_asserts: IndexMap<Arc<str>, IndexSet<ClassId>>,
    individuals: IndexSet<Arc<str>>,
    sameas_edges: Vec<(Arc<str>, Arc<str>)>,
    asserted: Vec<Triple>,
    sources: IndexSet<String>,
    function_sorts: IndexMap<(Arc<str>, usize), FunctionSort>,

    closure: Closure,
}

impl Default for TypeRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeRegistry {
    pub fn new() -> Self {
        let mut reg = TypeRegistry {
            prefixes: Prefixes::common(),
            level: ReasonerLevel::Full,
            frozen: false,
            queries: AtomicU64::new(0),
            classes: IndexMap::new(),
            subclass_edges: IndexSet::new(),
            equiv_edges: IndexSet::new(),
            disjoint_pairs: IndexSet::new(),
            instance_asserts: IndexMap::new(),
            individuals: IndexSet::new(),
            sameas_edges: Vec::new(),
            asserted: Vec::new(),
            sources: IndexSet::new(),
            function_sorts: IndexMap::new(),
            closure: Closure::default(),
        };
        reg.class_id(vocab::TOP);
        reg.class_id(vocab::BOTTOM);
        reg.rebuild_closure();
        reg
    }

    pub fn prefixes(&self) -> &Prefixes {
        &self.prefixes
    }

    pub fn set_prefixes(&mut self, prefixes: Prefixes) {
        self.prefixes = prefixes;
    }

    pub fn level(&self) -> ReasonerLevel {
        self.level
    }

    /// Applies a reasoner directive mode.
    pub fn set_reasoner_mode(&mut self, mode: &str) -> Result<(), RegistryError> {
        if self.frozen {
            return Err(RegistryError::Frozen);
        }
        self.level = ReasonerLevel::from_mode(mode)?;
        Ok(())
    }

    /// Marks the registry read-only. Further loads or declarations error.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Total subsumption/instance queries answered so far.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn bump(&self) {
        self.queries.fetch_add(1, Ordering::Relaxed);
    }

    fn class_id(&mut self, iri: &str) -> ClassId {
        let key = intern(iri);
        if let Some(&id) = self.classes.get(&key) {
            return id;
        }
        let id = self.classes.len();
        self.classes.insert(key, id);
        id
    }

    fn lookup_class(&self, ty: &TypeRef) -> Option<ClassId> {
        self.classes.get(ty.iri()).copied()
    }

    pub fn is_known_type(&self, ty: &TypeRef) -> bool {
        self.classes.contains_key(ty.iri())
    }

    pub fn is_known_individual(&self, name: &str) -> bool {
        self.individuals.contains(name)
    }

    /// All known individuals in lexicographic order.
    pub fn known_individuals(&self) -> BTreeSet<Arc<str>> {
        self.individuals.iter().cloned().collect()
    }

    /// All known classes (IRIs), top and bottom included.
    pub fn known_classes(&self) -> Vec<TypeRef> {
        self.classes.keys().map(|iri| TypeRef::new(iri)).collect()
    }

    pub fn has_source(&self, source: &str) -> bool {
        self.sources.contains(source)
    }

    /// Records an alternate spelling for an already loaded source, so the
    /// rdf builtin can match imports by the name the script used.
    pub fn record_source_alias(&mut self, alias: &str) {
        self.sources.insert(alias.to_string());
    }

    pub fn load_ontology_path(&mut self, path: &Path) -> Result<LoadReport, RegistryError> {
        let text = std::fs::read_to_string(path).map_err(|err| RegistryError::Io {
            path: path.display().to_string(),
            err,
        })?;
        self.load_ontology(&path.display().to_string(), &text)
    }

    /// Integrates N-Triples `text` and re-materializes the closure.
    ///
    /// Recognized axioms: rdfs:subClassOf, owl:equivalentClass,
    /// owl:disjointWith, rdf:type (class declarations and instance
    /// assertions), owl:sameAs. Everything else lands in the raw triple
    /// store only.
    pub fn load_ontology(&mut self, source: &str, text: &str) -> Result<LoadReport, RegistryError> {
        if self.frozen {
            return Err(RegistryError::Frozen);
        }
        let triples = parse_ntriples(text).map_err(|err| RegistryError::Parse {
            origin: source.to_string(),
            err,
        })?;

        let mut classes_mentioned: IndexSet<Arc<str>> = IndexSet::new();
        let mut individuals_mentioned: IndexSet<Arc<str>> = IndexSet::new();
        let mut axioms = 0usize;

        for t in &triples {
            let (s, p, o) = (&t.subject, &t.predicate, &t.object);
            let Some(p_iri) = p.as_iri() else {
                self.asserted.push(t.clone());
                continue;
            };
            match (p_iri, s.as_iri(), o.as_iri()) {
                (vocab::RDFS_SUBCLASSOF, Some(a), Some(b)) => {
                    let (ia, ib) = (self.class_id(a), self.class_id(b));
                    self.subclass_edges.insert((ia, ib));
                    classes_mentioned.insert(intern(a));
                    classes_mentioned.insert(intern(b));
                    axioms += 1;
                }
                (vocab::OWL_EQUIVALENT_CLASS, Some(a), Some(b)) => {
                    let (ia, ib) = (self.class_id(a), self.class_id(b));
                    self.equiv_edges.insert((ia, ib));
                    classes_mentioned.insert(intern(a));
                    classes_mentioned.insert(intern(b));
                    axioms += 1;
                }
                (vocab::OWL_DISJOINT_WITH, Some(a), Some(b)) => {
                    let (ia, ib) = (self.class_id(a), self.class_id(b));
                    self.disjoint_pairs.insert((ia, ib));
                    classes_mentioned.insert(intern(a));
                    classes_mentioned.insert(intern(b));
                    axioms += 1;
                }
                (vocab::RDF_TYPE, Some(a), Some(b)) => {
                    if b == vocab::RDFS_CLASS || b == vocab::OWL_CLASS {
                        self.class_id(a);
                        classes_mentioned.insert(intern(a));
                    } else if b == vocab::OWL_NAMED_INDIVIDUAL {
                        self.individuals.insert(intern(a));
                        individuals_mentioned.insert(intern(a));
                    } else {
                        let id = self.class_id(b);
                        let name = intern(a);
                        self.individuals.insert(Arc::clone(&name));
                        self.instance_asserts.entry(Arc::clone(&name)).or_default().insert(id);
                        classes_mentioned.insert(intern(b));
                        individuals_mentioned.insert(name);
                    }
                    axioms += 1;
                }
                (vocab::OWL_SAME_AS, Some(a), Some(b)) => {
                    let (na, nb) = (intern(a), intern(b));
                    self.individuals.insert(Arc::clone(&na));
                    self.individuals.insert(Arc::clone(&nb));
                    self.sameas_edges.push((Arc::clone(&na), Arc::clone(&nb)));
                    individuals_mentioned.insert(na);
                    individuals_mentioned.insert(nb);
                    axioms += 1;
                }
                _ => {}
            }
            self.asserted.push(t.clone());
        }

        self.sources.insert(source.to_string());
        self.rebuild_closure();
        self.check_consistency()?;

        Ok(LoadReport {
            classes: classes_mentioned.len(),
            individuals: individuals_mentioned.len(),
            axioms,
            triples: triples.len(),
        })
    }

    fn rebuild_closure(&mut self) {
        let n = self.classes.len();
        let mut full_adj = vec![Vec::new(); n];
        let mut trans_adj = vec![Vec::new(); n];
        for &(a, b) in &self.subclass_edges {
            full_adj[a].push(b);
            trans_adj[a].push(b);
        }
        for &(a, b) in &self.equiv_edges {
            full_adj[a].push(b);
            full_adj[b].push(a);
        }
        let reach_full = bfs_closure(n, &full_adj);
        let reach_trans = bfs_closure(n, &trans_adj);
        let rep = (0..n)
            .map(|a| (0..n).find(|&b| reach_full[a][b] && reach_full[b][a]).unwrap_or(a))
            .collect();

        let mut uf = UnionFind::new();
        for (a, b) in &self.sameas_edges {
            uf.union(a, b);
        }
        let mut same_rep = HashMap::new();
        for name in &self.individuals {
            let root = uf.find(name);
            same_rep
                .entry(root.clone())
                .and_modify(|cur: &mut Arc<str>| {
                    if **name < **cur {
                        *cur = Arc::clone(name);
                    }
                })
                .or_insert_with(|| Arc::clone(name));
        }
        let same_rep = self
            .individuals
            .iter()
            .map(|name| (Arc::clone(name), Arc::clone(&same_rep[&uf.find(name)])))
            .collect();

        self.closure = Closure { reach_full, reach_trans, rep, same_rep };
    }

    fn check_consistency(&self) -> Result<(), RegistryError> {
        let iri_of = |id: ClassId| self.classes.get_index(id).unwrap().0.to_string();
        for &(a, b) in &self.disjoint_pairs {
            if self.closure.rep[a] == self.closure.rep[b] {
                return Err(RegistryError::DisjointEquivalent(iri_of(a), iri_of(b)));
            }
            for name in &self.individuals {
                let in_a = self.raw_instance_id(name, a, ReasonerLevel::Full);
                let in_b = self.raw_instance_id(name, b, ReasonerLevel::Full);
                if in_a && in_b {
                    return Err(RegistryError::DisjointInstance {
                        individual: name.to_string(),
                        a: iri_of(a),
                        b: iri_of(b),
                    });
                }
            }
        }
        Ok(())
    }

    fn raw_subtype_id(&self, a: ClassId, b: ClassId, level: ReasonerLevel) -> bool {
        match level {
            ReasonerLevel::Full => self.closure.reach_full[a][b],
            ReasonerLevel::Transitive => self.closure.reach_trans[a][b],
            ReasonerLevel::Empty => a == b || self.subclass_edges.contains(&(a, b)),
        }
    }

    /// Level-aware subsumption without counting; top/bottom handled here.
    fn raw_subtype(&self, r1: &TypeRef, r2: &TypeRef) -> Result<bool, RegistryError> {
        if r2.is_top() || r1.is_bottom() {
            return Ok(true);
        }
        if r1 == r2 {
            return Ok(true);
        }
        if r1.is_top() || r2.is_bottom() {
            return Ok(false);
        }
        let a = self
            .lookup_class(r1)
            .ok_or_else(|| RegistryError::UnknownType(r1.iri().to_string()))?;
        let b = self
            .lookup_class(r2)
            .ok_or_else(|| RegistryError::UnknownType(r2.iri().to_string()))?;
        Ok(self.raw_subtype_id(a, b, self.level))
    }

    fn raw_instance_id(&self, name: &str, class: ClassId, level: ReasonerLevel) -> bool {
        let members: Vec<Arc<str>> = if level == ReasonerLevel::Full {
            match self.closure.same_rep.get(name) {
                Some(rep) => self
                    .individuals
                    .iter()
                    .filter(|i| self.closure.same_rep.get(*i) == Some(rep))
                    .cloned()
                    .collect(),
                None => vec![intern(name)],
            }
        } else {
            vec![intern(name)]
        };
        members.iter().any(|m| {
            self.instance_asserts
                .get(m)
                .map(|classes| {
                    classes.iter().any(|&c| match level {
                        // No inference: only the asserted rdf:type triple.
                        ReasonerLevel::Empty => c == class,
                        _ => self.raw_subtype_id(c, class, level),
                    })
                })
                .unwrap_or(false)
        })
    }

    fn raw_instance(&self, name: &str, class: &TypeRef) -> Result<bool, RegistryError> {
        if class.is_bottom() {
            return Ok(false);
        }
        if class.is_top() {
            return Ok(self.is_known_individual(name));
        }
        let id = self
            .lookup_class(class)
            .ok_or_else(|| RegistryError::UnknownType(class.iri().to_string()))?;
        Ok(self.raw_instance_id(name, id, self.level))
    }

    /// True iff `r1` is a subtype of `r2` in the materialized closure.
    /// Counted.
    pub fn is_subtype_of(&self, r1: &TypeRef, r2: &TypeRef) -> Result<bool, RegistryError> {
        self.bump();
        self.raw_subtype(r1, r2)
    }

    /// True iff the types subsume each other. Counted as one query.
    pub fn is_equivalent(&self, r1: &TypeRef, r2: &TypeRef) -> Result<bool, RegistryError> {
        self.bump();
        Ok(self.raw_subtype(r1, r2)? && self.raw_subtype(r2, r1)?)
    }

    /// True iff some sameAs-equivalent of `name` is asserted into `class` or
    /// a subclass of it. Counted.
    pub fn is_instance_of(&self, name: &str, class: &TypeRef) -> Result<bool, RegistryError> {
        self.bump();
        self.raw_instance(name, class)
    }

    /// Exactly the individuals `is_instance_of` accepts for `class`, in
    /// lexicographic order. Counted as one query.
    pub fn instances_of(&self, class: &TypeRef) -> Result<BTreeSet<Arc<str>>, RegistryError> {
        self.bump();
        let mut out = BTreeSet::new();
        for name in &self.individuals {
            if self.raw_instance(name, class)? {
                out.insert(Arc::clone(name));
            }
        }
        Ok(out)
    }

    /// Default unique-name assumption with derived equality: two names
    /// denote the same individual iff they are equal or sameAs-linked.
    pub fn same_individual(&self, a: &str, b: &str) -> bool {
        if a == b {
            return true;
        }
        if self.level != ReasonerLevel::Full {
            return false;
        }
        match (self.closure.same_rep.get(a), self.closure.same_rep.get(b)) {
            (Some(ra), Some(rb)) => ra == rb,
            _ => false,
        }
    }

    /// Stable representative of `name`'s sameAs cell: the lexicographic
    /// minimum at the full level, the name itself otherwise. Uncounted;
    /// meant for canonical atom identities, not reasoning.
    pub fn canonical_individual(&self, name: &str) -> Arc<str> {
        if self.level == ReasonerLevel::Full {
            if let Some(rep) = self.closure.same_rep.get(name) {
                return Arc::clone(rep);
            }
        }
        intern(name)
    }

    /// The lower of two types, used when two typed variables meet:
    /// `r1` if `r1 <= r2`, `r2` if `r2 < r1`, the other argument when one is
    /// top, bottom otherwise. Deliberately not a greatest lower bound: two
    /// incomparable types with a common subclass still yield bottom. Issues
    /// at most two subsumption queries.
    pub fn lower(&self, r1: &TypeRef, r2: &TypeRef) -> Result<TypeRef, RegistryError> {
        if r1 == r2 || r2.is_top() {
            return Ok(r1.clone());
        }
        if r1.is_top() {
            return Ok(r2.clone());
        }
        if r1.is_bottom() || r2.is_bottom() {
            return Ok(TypeRef::bottom());
        }
        if self.is_subtype_of(r1, r2)? {
            return Ok(r1.clone());
        }
        if self.is_subtype_of(r2, r1)? {
            return Ok(r2.clone());
        }
        Ok(TypeRef::bottom())
    }

    /// Declares `functor/arity : arg_types -> result`. All types must be
    /// known; redeclaring with a different signature is an error.
    pub fn declare_function_sort(
        &mut self,
        functor: &str,
        arg_types: Vec<TypeRef>,
        result: TypeRef,
    ) -> Result<(), RegistryError> {
        if self.frozen {
            return Err(RegistryError::Frozen);
        }
        for ty in arg_types.iter().chain(std::iter::once(&result)) {
            if !ty.is_top() && !ty.is_bottom() && !self.is_known_type(ty) {
                return Err(RegistryError::UnknownType(ty.iri().to_string()));
            }
        }
        let arity = arg_types.len();
        let key = (intern(functor), arity);
        let sort = FunctionSort { arg_types, result };
        if let Some(existing) = self.function_sorts.get(&key) {
            if *existing != sort {
                return Err(RegistryError::ConflictingFunctionSort {
                    functor: functor.to_string(),
                    arity,
                });
            }
            return Ok(());
        }
        self.function_sorts.insert(key, sort);
        Ok(())
    }

    pub fn function_sort(&self, functor: &str, arity: usize) -> Option<&FunctionSort> {
        self.function_sorts.get(&(intern(functor), arity))
    }

    /// Effective type of a compound term: declared result type, top if the
    /// functor has no declaration.
    pub fn compound_type(&self, functor: &str, arity: usize) -> TypeRef {
        self.function_sort(functor, arity)
            .map(|fs| fs.result.clone())
            .unwrap_or_else(TypeRef::top)
    }

    /// Checks a constant's annotation against the A-Box: returns the pair of
    /// disjoint classes it violates, if the name is a known individual
    /// asserted into a class disjoint with `ty`.
    pub fn annotation_conflict(&self, name: &str, ty: &TypeRef) -> Option<(TypeRef, TypeRef)> {
        let ty_id = self.lookup_class(ty)?;
        let asserted = self.instance_asserts.get(name)?;
        let iri_of = |id: ClassId| TypeRef::new(self.classes.get_index(id).unwrap().0);
        for &(a, b) in &self.disjoint_pairs {
            for &(x, y) in &[(a, b), (b, a)] {
                if self.raw_subtype_id(ty_id, x, ReasonerLevel::Full)
                    && asserted.iter().any(|&c| self.raw_subtype_id(c, y, ReasonerLevel::Full))
                {
                    return Some((iri_of(x), iri_of(y)));
                }
            }
        }
        None
    }

    /// Triples visible at `level`: the asserted store plus, depending on the
    /// level, derived subClassOf / rdf:type / equivalence / sameAs /
    /// disjointness triples. Sorted for deterministic enumeration.
    /// Trivial reflexive subClassOf pairs and edges through top/bottom are
    /// not materialized.
    pub fn view_triples(&self, level: ReasonerLevel) -> Vec<Triple> {
        let mut out: IndexSet<Triple> = self.asserted.iter().cloned().collect();
        let iri_of = |id: ClassId| -> Arc<str> { Arc::clone(self.classes.get_index(id).unwrap().0) };
        let n = self.classes.len();
        let mk = |s: Arc<str>, p: &str, o: Arc<str>| Triple {
            subject: Node::Iri(s),
            predicate: Node::Iri(intern(p)),
            object: Node::Iri(o),
        };

        if level >= ReasonerLevel::Transitive {
            let reach = match level {
                ReasonerLevel::Full => &self.closure.reach_full,
                _ => &self.closure.reach_trans,
            };
            for a in 0..n {
                for b in 0..n {
                    if a != b && reach[a][b] && a > 1 && b > 1 {
                        out.insert(mk(iri_of(a), vocab::RDFS_SUBCLASSOF, iri_of(b)));
                    }
                }
            }
        }
        if level == ReasonerLevel::Full {
            for a in 0..n {
                for b in 0..n {
                    if a != b && self.closure.rep[a] == self.closure.rep[b] {
                        out.insert(mk(iri_of(a), vocab::OWL_EQUIVALENT_CLASS, iri_of(b)));
                    }
                }
            }
            for id in 2..n {
                for name in &self.individuals {
                    if self.raw_instance_id(name, id, ReasonerLevel::Full) {
                        out.insert(mk(Arc::clone(name), vocab::RDF_TYPE, iri_of(id)));
                    }
                }
            }
            for a in &self.individuals {
                for b in &self.individuals {
                    if a != b && self.same_individual(a, b) {
                        out.insert(mk(Arc::clone(a), vocab::OWL_SAME_AS, Arc::clone(b)));
                    }
                }
            }
            for &(a, b) in &self.disjoint_pairs {
                out.insert(mk(iri_of(b), vocab::OWL_DISJOINT_WITH, iri_of(a)));
            }
        }

        let mut v: Vec<Triple> = out.into_iter().collect();
        v.sort_by(|x, y| {
            (x.subject.name(), x.predicate.name(), x.object.name()).cmp(&(
                y.subject.name(),
                y.predicate.name(),
                y.object.name(),
            ))
        });
        v
    }
}

fn bfs_closure(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for start in 0..n {
        let row = &mut reach[start];
        let mut stack = vec![start];
        row[start] = true;
        while let Some(cur) = stack.pop() {
            for &next in &adj[cur] {
                if !row[next] {
                    row[next] = true;
                    stack.push(next);
                }
            }
        }
    }
    reach
}

pub(crate) struct UnionFind {
    parent: HashMap<Arc<str>, Arc<str>>,
}

impl UnionFind {
    fn new() -> Self {
        UnionFind { parent: HashMap::new() }
    }

    fn find(&self, name: &Arc<str>) -> Arc<str> {
        let mut cur = Arc::clone(name);
        while let Some(next) = self.parent.get(&cur) {
            if *next == cur {
                break;
            }
            cur = Arc::clone(next);
        }
        cur
    }

    fn union(&mut self, a: &Arc<str>, b: &Arc<str>) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent.insert(ra, rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: &str = "http://example.org/wine#";

    fn ty(local: &str) -> TypeRef {
        TypeRef::new(&format!("{EX}{local}"))
    }

    fn nt(lines: &[&str]) -> String {
        lines.iter().map(|l| format!("{l} .\n")).collect()
    }

    fn sub(a: &str, b: &str) -> String {
        format!("<{EX}{a}> <{}> <{EX}{b}>", vocab::RDFS_SUBCLASSOF)
    }

    fn inst(i: &str, c: &str) -> String {
        format!("<{EX}{i}> <{}> <{EX}{c}>", vocab::RDF_TYPE)
    }

    fn wine_registry() -> TypeRegistry {
        let mut reg = TypeRegistry::new();
        reg.load_ontology(
            "wine.nt",
            &nt(&[
                &sub("White_Wine", "Wine"),
                &sub("Red_Wine", "Wine"),
                &inst("Chardonnay", "White_Wine"),
                &inst("Merlot", "Red_Wine"),
            ]),
        )
        .unwrap();
        reg
    }

    #[test]
    fn load_report_counts_mentions() {
        let mut reg = TypeRegistry::new();
        let report = reg
            .load_ontology(
                "t.nt",
                &nt(&[&sub("White_Wine", "Wine"), &inst("Chardonnay", "White_Wine")]),
            )
            .unwrap();
        assert_eq!(report.classes, 2);
        assert_eq!(report.individuals, 1);
        assert_eq!(report.axioms, 2);
    }

    #[test]
    fn empty_load_changes_nothing() {
        let mut reg = TypeRegistry::new();
        let before = reg.known_classes().len();
        let report = reg.load_ontology("empty.nt", "").unwrap();
        assert_eq!(report, LoadReport { classes: 0, individuals: 0, axioms: 0, triples: 0 });
        assert_eq!(reg.known_classes().len(), before);
        assert!(reg.known_individuals().is_empty());
    }

    #[test]
    fn subtype_closure_is_reflexive_and_transitive() {
        let mut reg = TypeRegistry::new();
        reg.load_ontology("t.nt", &nt(&[&sub("A", "B"), &sub("B", "C")])).unwrap();
        assert!(reg.is_subtype_of(&ty("A"), &ty("C")).unwrap());
        assert!(reg.is_subtype_of(&ty("A"), &ty("A")).unwrap());
        assert!(!reg.is_subtype_of(&ty("C"), &ty("A")).unwrap());
        // Bottom <= every class <= top, without explicit edges.
        assert!(reg.is_subtype_of(&TypeRef::bottom(), &ty("A")).unwrap());
        assert!(reg.is_subtype_of(&ty("A"), &TypeRef::top()).unwrap());
        assert!(!reg.is_subtype_of(&TypeRef::top(), &ty("A")).unwrap());
    }

    #[test]
    fn subclass_cycles_collapse_to_equivalence() {
        let mut reg = TypeRegistry::new();
        reg.load_ontology("t.nt", &nt(&[&sub("A", "B"), &sub("B", "C"), &sub("C", "A")]))
            .unwrap();
        assert!(reg.is_equivalent(&ty("A"), &ty("C")).unwrap());
        assert!(reg.is_subtype_of(&ty("C"), &ty("A")).unwrap());
    }

    #[test]
    fn equivalent_class_axiom_merges() {
        let mut reg = TypeRegistry::new();
        let equiv = format!("<{EX}Customer> <{}> <{EX}Client>", vocab::OWL_EQUIVALENT_CLASS);
        reg.load_ontology("t.nt", &nt(&[&equiv, &inst("Adrian", "Customer")])).unwrap();
        assert!(reg.is_equivalent(&ty("Customer"), &ty("Client")).unwrap());
        assert!(reg.is_instance_of(&format!("{EX}Adrian"), &ty("Client")).unwrap());
    }

    #[test]
    fn instances_respect_closure_and_are_sorted() {
        let reg = wine_registry();
        let wines = reg.instances_of(&ty("Wine")).unwrap();
        let names: Vec<&str> = wines.iter().map(|s| &**s).collect();
        assert_eq!(names, [&format!("{EX}Chardonnay"), &format!("{EX}Merlot")]);
        assert!(reg.is_instance_of(&format!("{EX}Chardonnay"), &ty("Wine")).unwrap());
        assert!(!reg.is_instance_of(&format!("{EX}Chardonnay"), &ty("Red_Wine")).unwrap());
        // Every known individual is an instance of top.
        assert_eq!(reg.instances_of(&TypeRef::top()).unwrap().len(), 2);
        assert!(reg.instances_of(&TypeRef::bottom()).unwrap().is_empty());
    }

    #[test]
    fn lower_three_clauses_and_budget() {
        let reg = wine_registry();
        let (wine, white, red) = (ty("Wine"), ty("White_Wine"), ty("Red_Wine"));

        let before = reg.query_count();
        assert_eq!(reg.lower(&white, &wine).unwrap(), white);
        assert!(reg.query_count() - before <= 2);

        let before = reg.query_count();
        assert_eq!(reg.lower(&wine, &white).unwrap(), white);
        assert!(reg.query_count() - before <= 2);

        let before = reg.query_count();
        assert_eq!(reg.lower(&red, &white).unwrap(), TypeRef::bottom());
        assert!(reg.query_count() - before <= 2);

        // Top short-circuits cost nothing.
        let before = reg.query_count();
        assert_eq!(reg.lower(&TypeRef::top(), &wine).unwrap(), wine);
        assert_eq!(reg.lower(&wine, &TypeRef::top()).unwrap(), wine);
        assert_eq!(reg.lower(&TypeRef::top(), &TypeRef::top()).unwrap(), TypeRef::top());
        assert_eq!(reg.query_count(), before);
    }

    #[test]
    fn sameas_links_individuals() {
        let mut reg = TypeRegistry::new();
        let same = format!("<{EX}Merlot> <{}> <{EX}TheMerlot>", vocab::OWL_SAME_AS);
        reg.load_ontology("t.nt", &nt(&[&inst("Merlot", "Red_Wine"), &same])).unwrap();
        assert!(reg.same_individual(&format!("{EX}Merlot"), &format!("{EX}TheMerlot")));
        assert!(!reg.same_individual(&format!("{EX}Merlot"), &format!("{EX}Other")));
        // Instance assertions carry across the sameAs cell.
        assert!(reg.is_instance_of(&format!("{EX}TheMerlot"), &ty("Red_Wine")).unwrap());
        let all = reg.instances_of(&ty("Red_Wine")).unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn disjointness_violations_fail_the_load() {
        let mut reg = TypeRegistry::new();
        let disj = format!("<{EX}Red_Wine> <{}> <{EX}White_Wine>", vocab::OWL_DISJOINT_WITH);
        let err = reg
            .load_ontology(
                "t.nt",
                &nt(&[&disj, &inst("Oddball", "Red_Wine"), &inst("Oddball", "White_Wine")]),
            )
            .unwrap_err();
        assert!(matches!(err, RegistryError::DisjointInstance { .. }));

        let mut reg = TypeRegistry::new();
        let err = reg
            .load_ontology("t.nt", &nt(&[&disj, &sub("Red_Wine", "White_Wine"), &sub("White_Wine", "Red_Wine")]))
            .unwrap_err();
        assert!(matches!(err, RegistryError::DisjointEquivalent(..)));
    }

    #[test]
    fn annotation_conflicts_are_detected() {
        let mut reg = TypeRegistry::new();
        let disj = format!("<{EX}Red_Wine> <{}> <{EX}White_Wine>", vocab::OWL_DISJOINT_WITH);
        reg.load_ontology("t.nt", &nt(&[&disj, &inst("Merlot", "Red_Wine")])).unwrap();
        assert!(reg.annotation_conflict(&format!("{EX}Merlot"), &ty("White_Wine")).is_some());
        assert!(reg.annotation_conflict(&format!("{EX}Merlot"), &ty("Red_Wine")).is_none());
        assert!(reg.annotation_conflict("fresh", &ty("White_Wine")).is_none());
    }

    #[test]
    fn load_order_does_not_change_answers() {
        let f1 = nt(&[&sub("White_Wine", "Wine"), &inst("Chardonnay", "White_Wine")]);
        let f2 = nt(&[&sub("Red_Wine", "Wine"), &inst("Merlot", "Red_Wine")]);
        let mut a = TypeRegistry::new();
        a.load_ontology("f1", &f1).unwrap();
        a.load_ontology("f2", &f2).unwrap();
        let mut b = TypeRegistry::new();
        b.load_ontology("f2", &f2).unwrap();
        b.load_ontology("f1", &f1).unwrap();
        for t1 in ["Wine", "White_Wine", "Red_Wine"] {
            for t2 in ["Wine", "White_Wine", "Red_Wine"] {
                assert_eq!(
                    a.is_subtype_of(&ty(t1), &ty(t2)).unwrap(),
                    b.is_subtype_of(&ty(t1), &ty(t2)).unwrap()
                );
            }
            assert_eq!(a.instances_of(&ty(t1)).unwrap(), b.instances_of(&ty(t1)).unwrap());
        }
    }

    #[test]
    fn function_sorts_declare_and_conflict() {
        let mut reg = wine_registry();
        reg.declare_function_sort("price", vec![ty("Wine")], ty("Red_Wine")).unwrap();
        // Identical redeclaration is fine.
        reg.declare_function_sort("price", vec![ty("Wine")], ty("Red_Wine")).unwrap();
        let err = reg.declare_function_sort("price", vec![ty("Wine")], ty("Wine")).unwrap_err();
        assert!(matches!(err, RegistryError::ConflictingFunctionSort { .. }));
        assert_eq!(reg.compound_type("price", 1), ty("Red_Wine"));
        assert!(reg.compound_type("unknown", 3).is_top());
        let err = reg.declare_function_sort("p", vec![ty("Nope")], ty("Wine")).unwrap_err();
        assert!(matches!(err, RegistryError::UnknownType(_)));
    }

    #[test]
    fn unknown_types_error() {
        let reg = wine_registry();
        let err = reg.is_subtype_of(&ty("Wine"), &ty("Cheese")).unwrap_err();
        assert!(matches!(err, RegistryError::UnknownType(_)));
    }

    #[test]
    fn frozen_registry_rejects_mutation() {
        let mut reg = wine_registry();
        reg.freeze();
        assert!(matches!(reg.load_ontology("x", ""), Err(RegistryError::Frozen)));
        assert!(matches!(
            reg.declare_function_sort("f", vec![], ty("Wine")),
            Err(RegistryError::Frozen)
        ));
        // Queries still work.
        assert!(reg.is_subtype_of(&ty("White_Wine"), &ty("Wine")).unwrap());
    }

    #[test]
    fn reasoner_levels_grade_the_view() {
        let mut reg = TypeRegistry::new();
        let equiv = format!("<{EX}A> <{}> <{EX}B>", vocab::OWL_EQUIVALENT_CLASS);
        reg.load_ontology("t.nt", &nt(&[&sub("C", "D"), &sub("D", "E"), &equiv, &inst("i", "C")]))
            .unwrap();

        reg.set_reasoner_mode("empty").unwrap();
        assert!(reg.is_subtype_of(&ty("C"), &ty("D")).unwrap());
        assert!(!reg.is_subtype_of(&ty("C"), &ty("E")).unwrap());
        assert!(!reg.is_subtype_of(&ty("A"), &ty("B")).unwrap());
        assert!(!reg.is_instance_of(&format!("{EX}i"), &ty("D")).unwrap());

        reg.set_reasoner_mode("transitive").unwrap();
        assert!(reg.is_subtype_of(&ty("C"), &ty("E")).unwrap());
        assert!(!reg.is_subtype_of(&ty("A"), &ty("B")).unwrap());

        reg.set_reasoner_mode("dl").unwrap();
        assert!(reg.is_subtype_of(&ty("A"), &ty("B")).unwrap());
        assert!(reg.is_instance_of(&format!("{EX}i"), &ty("E")).unwrap());

        assert!(matches!(
            reg.set_reasoner_mode("swrl"),
            Err(RegistryError::UnsupportedReasoner(_))
        ));
    }

    #[test]
    fn view_triples_grow_with_level() {
        let reg = wine_registry();
        let asserted = reg.view_triples(ReasonerLevel::Empty);
        let trans = reg.view_triples(ReasonerLevel::Transitive);
        let full = reg.view_triples(ReasonerLevel::Full);
        assert_eq!(asserted.len(), 4);
        assert!(trans.len() >= asserted.len());
        assert!(full.len() > trans.len());
        // Full view derives Chardonnay rdf:type Wine.
        let derived = full.iter().any(|t| {
            t.subject.name() == format!("{EX}Chardonnay")
                && t.predicate.name() == vocab::RDF_TYPE
                && t.object.name() == format!("{EX}Wine")
        });
        assert!(derived);
    }
}
