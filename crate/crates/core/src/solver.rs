//! SLDNF resolution over DL-typed terms.
//!
//! Depth-first, leftmost literal first, clauses in source order. Unification
//! is the order-sorted kind from [`crate::unify`], so a goal literal whose
//! argument types cannot meet a clause head fails before the clause body is
//! ever entered.
//!
//! Negation as failure is safe only on ground literals: selecting `not(L)`
//! with variables in `L` aborts the solve with a floundering error. The
//! subproof for `L` runs with a fresh loop table; if it was cut short by the
//! depth limit, `not(L)` fails conservatively instead of claiming success.
//! Explicit negation is separate: `neg(p(...))` goals resolve only against
//! `neg(...)` heads.
//!
//! Two guards keep the search finite. A branch-local loop table prunes a
//! call that repeats an ancestor call up to variable renaming, and a depth
//! limit cuts the rest; any cut sets `depth_limited` on the outcome so the
//! caller knows the answer set may be incomplete.
//!
//! Four predicates are built in: `=` unifies, the numeric comparisons `>`
//! `<` `>=` `=<` compare constants with compatible types, `rdf(Source,
//! Mode, S, P, O)` streams the ontology view a given reasoner mode would
//! see, and `instance_of(X, Class)` checks or enumerates class membership.
//! A fact with a typed variable left open after head unification stands for
//! every instance of the type; resolution enumerates them from the
//! registry.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::ntriples::Node;
use crate::registry::{ReasonerLevel, RegistryError, TypeRegistry};
use crate::sorts::TypeRef;
use crate::subst::Substitution;
use crate::term::{numeric_value, Atom, Clause, Literal, Program, Sign, Term, VarKey};
use crate::term::{PrettyExt, COMPARISON_PREDS};
use crate::unify::{effective_type, UnificationProblem, Unifier, UnifyError};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("floundering: {0} selected with unbound variables")]
    Floundering(String),
    #[error("{0} needs ground arguments")]
    Instantiation(String),
    #[error("builtin error: {0}")]
    Builtin(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

impl SolveError {
    fn from_unify(e: UnifyError) -> SolveError {
        match e {
            UnifyError::Registry(r) => SolveError::Registry(r),
            other => SolveError::Builtin(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveLimits {
    pub max_depth: usize,
    pub max_answers: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { max_depth: 256, max_answers: 1024 }
    }
}

/// One variable of the goal, the term it received and its final type.
#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub var: VarKey,
    pub term: Term,
    pub ty: TypeRef,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    /// Goal variables in first-occurrence order.
    pub bindings: Vec<Binding>,
    /// Resolution steps along the branch that produced this answer.
    pub depth: usize,
    /// Registry queries issued since the solve started, measured at the
    /// moment this answer was emitted.
    pub registry_queries: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Clause head unification attempts plus builtin evaluations.
    pub steps: u64,
    /// Total registry queries issued by the solve.
    pub registry_queries: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOutcome {
    pub answers: Vec<Answer>,
    /// True when any branch was cut by the depth limit: the answer set may
    /// be incomplete, though every reported answer is sound.
    pub depth_limited: bool,
    pub stats: SolveStats,
}

pub struct Solver<'a> {
    program: &'a Program,
    registry: &'a TypeRegistry,
    limits: SolveLimits,
}

impl<'a> Solver<'a> {
    pub fn new(program: &'a Program, registry: &'a TypeRegistry) -> Self {
        Solver { program, registry, limits: SolveLimits::default() }
    }

    pub fn with_limits(program: &'a Program, registry: &'a TypeRegistry, limits: SolveLimits) -> Self {
        Solver { program, registry, limits }
    }

    pub fn limits(&self) -> SolveLimits {
        self.limits
    }

    /// Proves `goal` and collects up to `max_answers` distinct answers.
    pub fn solve(&self, goal: &Clause) -> Result<SolveOutcome, SolveError> {
        let goal_vars = goal.variables();
        let declared = declared_types(goal);
        let start_queries = self.registry.query_count();
        let registry = self.registry;

        let mut answers: Vec<Answer> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let max_answers = self.limits.max_answers;

        let mut search = Search {
            program: self.program,
            registry,
            unifier: Unifier::new(registry),
            limits: self.limits,
            salt: 0,
            steps: 0,
            depth_limited: false,
        };

        let mut emit = |subst: &Substitution, depth: usize| -> ControlFlow<()> {
            let mut bindings = Vec::with_capacity(goal_vars.len());
            for key in &goal_vars {
                let applied = subst.apply_term(&Term::var_key(key.clone(), TypeRef::top()));
                let eff = effective_type(&applied, registry);
                let ty = if !eff.is_top() {
                    eff
                } else if let Some(narrowed) = subst.type_update(key) {
                    narrowed.clone()
                } else {
                    declared.get(key).cloned().unwrap_or_else(TypeRef::top)
                };
                bindings.push(Binding { var: key.clone(), term: applied, ty });
            }
            let mut canon = String::new();
            for b in &bindings {
                let _ = write!(canon, "{:?}={:?}:{};", b.var, b.term, b.ty.iri());
            }
            if !seen.insert(canon) {
                return ControlFlow::Continue(());
            }
            answers.push(Answer {
                bindings,
                depth,
                registry_queries: registry.query_count() - start_queries,
            });
            if answers.len() >= max_answers {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        };

        // Break here only means the answer limit was reached.
        let _ = search.prove(&goal.body, &Substitution::new(), 0, &Path::Root, &mut emit)?;

        Ok(SolveOutcome {
            answers,
            depth_limited: search.depth_limited,
            stats: SolveStats {
                steps: search.steps,
                registry_queries: self.registry.query_count() - start_queries,
            },
        })
    }
}

/// First type annotation each goal variable is written with.
fn declared_types(goal: &Clause) -> BTreeMap<VarKey, TypeRef> {
    let mut out = BTreeMap::new();
    fn walk(t: &Term, out: &mut BTreeMap<VarKey, TypeRef>) {
        match t {
            Term::Var(v) => {
                if !v.ty.is_top() {
                    out.entry(v.key.clone()).or_insert_with(|| v.ty.clone());
                }
            }
            Term::Const(_) => {}
            Term::Compound(c) => c.args.iter().for_each(|a| walk(a, out)),
        }
    }
    for lit in goal.head.iter().chain(goal.body.iter()) {
        for arg in &lit.atom.args {
            walk(arg, &mut out);
        }
    }
    out
}

/// Chain of normalized call patterns along the current branch.
enum Path<'p> {
    Root,
    Node { pattern: String, parent: &'p Path<'p> },
}

impl Path<'_> {
    fn contains(&self, pat: &str) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Path::Root => return false,
                Path::Node { pattern, parent } => {
                    if pattern == pat {
                        return true;
                    }
                    cur = parent;
                }
            }
        }
    }
}

/// Renders a literal with variables numbered by first occurrence, so two
/// calls equal up to renaming produce the same string.
fn call_pattern(lit: &Literal) -> String {
    let mut names: BTreeMap<VarKey, usize> = BTreeMap::new();
    let mut out = String::new();
    if lit.sign == Sign::Neg {
        out.push('~');
    }
    out.push_str(&lit.atom.pred);
    out.push('(');
    for (i, arg) in lit.atom.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        pattern_term(arg, &mut names, &mut out);
    }
    out.push(')');
    out
}

fn pattern_term(t: &Term, names: &mut BTreeMap<VarKey, usize>, out: &mut String) {
    match t {
        Term::Var(v) => {
            let next = names.len();
            let idx = *names.entry(v.key.clone()).or_insert(next);
            let _ = write!(out, "_{idx}:{}", v.ty.iri());
        }
        Term::Const(c) => {
            let _ = write!(out, "{}:{}", c.name, c.ty.iri());
        }
        Term::Compound(c) => {
            let _ = write!(out, "{}(", c.functor);
            for (i, arg) in c.args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                pattern_term(arg, names, out);
            }
            out.push(')');
        }
    }
}

struct Search<'s> {
    program: &'s Program,
    registry: &'s TypeRegistry,
    unifier: Unifier<'s>,
    limits: SolveLimits,
    salt: u32,
    steps: u64,
    depth_limited: bool,
}

type Emit<'e> = dyn FnMut(&Substitution, usize) -> ControlFlow<()> + 'e;

impl Search<'_> {
    fn prove(
        &mut self,
        goals: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        let Some((first, rest)) = goals.split_first() else {
            return Ok(emit(subst, depth));
        };
        let lit = subst.apply_literal(first);

        if lit.naf {
            return self.negation_as_failure(&lit, rest, subst, depth, path, emit);
        }

        if lit.sign == Sign::Pos {
            let pred: &str = &lit.atom.pred;
            if pred == "=" && lit.atom.args.len() == 2 {
                return self.builtin_unify(&lit, rest, subst, depth, path, emit);
            }
            if COMPARISON_PREDS.contains(&pred) && lit.atom.args.len() == 2 {
                self.steps += 1;
                return match self.compare(&lit)? {
                    true => self.prove(rest, subst, depth, path, emit),
                    false => Ok(ControlFlow::Continue(())),
                };
            }
            if pred == "rdf" && lit.atom.args.len() == 5 {
                return self.builtin_rdf(&lit, rest, subst, depth, path, emit);
            }
            if pred == "instance_of" && lit.atom.args.len() == 2 {
                return self.builtin_instance_of(&lit, rest, subst, depth, path, emit);
            }
        }

        let pattern = call_pattern(&lit);
        if path.contains(&pattern) {
            // The same call is already being proved higher up this branch.
            return Ok(ControlFlow::Continue(()));
        }
        if depth >= self.limits.max_depth {
            self.depth_limited = true;
            return Ok(ControlFlow::Continue(()));
        }
        let node = Path::Node { pattern, parent: path };

        for clause in &self.program.clauses {
            let Some(head) = &clause.head else { continue };
            if head.sign != lit.sign
                || head.atom.pred != lit.atom.pred
                || head.atom.args.len() != lit.atom.args.len()
            {
                continue;
            }
            self.steps += 1;
            self.salt += 1;
            let renamed = clause.rename(self.salt);
            let rhead = renamed.head.as_ref().expect("renamed clause keeps its head");
            let mgu = match self.unifier.unify_atoms(&lit.atom, &rhead.atom) {
                Ok(mgu) => mgu,
                Err(e) if e.is_failure() => continue,
                Err(e) => return Err(SolveError::from_unify(e)),
            };
            let combined = subst.compose(&mgu);
            let flow = if renamed.body.is_empty() {
                self.resolve_fact(&rhead.atom, rest, &combined, depth + 1, &node, emit)?
            } else {
                let mut goals2 = renamed.body.clone();
                goals2.extend_from_slice(rest);
                self.prove(&goals2, &combined, depth + 1, &node, emit)?
            };
            if flow.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    /// A fact whose head still has typed variables after unification stands
    /// for all type-correct instances; enumerate them.
    fn resolve_fact(
        &mut self,
        head: &Atom,
        rest: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        let applied = subst.apply_atom(head);
        let mut typed_free: Vec<(VarKey, TypeRef)> = Vec::new();
        fn collect(t: &Term, out: &mut Vec<(VarKey, TypeRef)>) {
            match t {
                Term::Var(v) => {
                    if !v.ty.is_top() && out.iter().all(|(k, _)| *k != v.key) {
                        out.push((v.key.clone(), v.ty.clone()));
                    }
                }
                Term::Const(_) => {}
                Term::Compound(c) => c.args.iter().for_each(|a| collect(a, out)),
            }
        }
        for arg in &applied.args {
            collect(arg, &mut typed_free);
        }
        if typed_free.is_empty() {
            return self.prove(rest, subst, depth, path, emit);
        }

        let mut choices = Vec::with_capacity(typed_free.len());
        for (key, ty) in &typed_free {
            let instances: Vec<Term> = self
                .registry
                .instances_of(ty)?
                .into_iter()
                .map(|name| Term::typed_constant(&name, ty.clone()))
                .collect();
            if instances.is_empty() {
                return Ok(ControlFlow::Continue(()));
            }
            choices.push((key.clone(), instances));
        }
        let mut indices = vec![0usize; choices.len()];
        loop {
            let mut step = Substitution::new();
            for (slot, (key, instances)) in indices.iter().zip(&choices) {
                step.bind(key.clone(), instances[*slot].clone());
            }
            let combined = subst.compose(&step);
            if self.prove(rest, &combined, depth, path, emit)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == indices.len() {
                    return Ok(ControlFlow::Continue(()));
                }
                indices[i] += 1;
                if indices[i] < choices[i].1.len() {
                    break;
                }
                indices[i] = 0;
                i += 1;
            }
        }
    }

    fn negation_as_failure(
        &mut self,
        lit: &Literal,
        rest: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        if !lit.is_ground() {
            let shown = lit.pretty(self.registry.prefixes()).to_string();
            return Err(SolveError::Floundering(shown));
        }
        let target = Literal { naf: false, sign: lit.sign, atom: lit.atom.clone() };
        let saved_limited = self.depth_limited;
        self.depth_limited = false;
        let mut found = false;
        let mut on_proof = |_: &Substitution, _: usize| -> ControlFlow<()> {
            found = true;
            ControlFlow::Break(())
        };
        // Fresh loop table: the subproof is a new derivation, not a
        // continuation of this branch. Break just means a proof was found.
        let _ = self.prove(
            std::slice::from_ref(&target),
            &Substitution::new(),
            depth,
            &Path::Root,
            &mut on_proof,
        )?;
        let sub_limited = self.depth_limited;
        self.depth_limited = saved_limited || sub_limited;
        if found || sub_limited {
            // Proven, or inconclusive because the subproof was cut short:
            // either way `not` must not succeed.
            return Ok(ControlFlow::Continue(()));
        }
        self.prove(rest, subst, depth, path, emit)
    }

    fn builtin_unify(
        &mut self,
        lit: &Literal,
        rest: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        self.steps += 1;
        match self.unifier.unify(&lit.atom.args[0], &lit.atom.args[1]) {
            Ok(mgu) => {
                let combined = subst.compose(&mgu);
                self.prove(rest, &combined, depth, path, emit)
            }
            Err(e) if e.is_failure() => Ok(ControlFlow::Continue(())),
            Err(e) => Err(SolveError::from_unify(e)),
        }
    }

    /// Numeric comparison on constants. Unbound sides are an error, numeric
    /// parsing failures too; incompatible types just fail the branch.
    fn compare(&self, lit: &Literal) -> Result<bool, SolveError> {
        let shown = || lit.pretty(self.registry.prefixes()).to_string();
        let mut sides = [0.0f64; 2];
        let mut types: [TypeRef; 2] = [TypeRef::top(), TypeRef::top()];
        for (i, arg) in lit.atom.args.iter().enumerate() {
            match arg {
                Term::Var(_) => return Err(SolveError::Instantiation(shown())),
                Term::Compound(_) => {
                    return Err(SolveError::Builtin(format!(
                        "cannot compare a function term in {}",
                        shown()
                    )));
                }
                Term::Const(c) => {
                    let Some(v) = numeric_value(&c.name) else {
                        return Err(SolveError::Builtin(format!(
                            "{} is not numeric in {}",
                            c.name,
                            shown()
                        )));
                    };
                    sides[i] = v;
                    types[i] = c.ty.clone();
                }
            }
        }
        if !types[0].is_top() && !types[1].is_top() {
            let met = self.registry.lower(&types[0], &types[1])?;
            if met.is_bottom() {
                return Ok(false);
            }
        }
        let [a, b] = sides;
        Ok(match &*lit.atom.pred {
            ">" => a > b,
            "<" => a < b,
            ">=" => a >= b,
            "=<" => a <= b,
            other => return Err(SolveError::Builtin(format!("unknown comparison {other}"))),
        })
    }

    /// `rdf(Source, Mode, S, P, O)`: S, P, O range over the triples the
    /// given reasoner mode derives from the loaded ontology.
    fn builtin_rdf(
        &mut self,
        lit: &Literal,
        rest: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        self.steps += 1;
        let shown = || lit.pretty(self.registry.prefixes()).to_string();
        let source = match &lit.atom.args[0] {
            Term::Const(c) => self.resolve_name(&c.name),
            _ => return Err(SolveError::Instantiation(shown())),
        };
        let mode = match &lit.atom.args[1] {
            Term::Const(c) => c.name.to_string(),
            _ => return Err(SolveError::Instantiation(shown())),
        };
        let level = ReasonerLevel::from_mode(&mode)?;
        if !self.registry.has_source(&source) {
            return Ok(ControlFlow::Continue(()));
        }

        let pattern: Vec<Term> =
            lit.atom.args[2..=4].iter().map(|t| self.resolve_constants(t)).collect();
        for triple in self.registry.view_triples(level) {
            let nodes =
                [node_term(&triple.subject), node_term(&triple.predicate), node_term(&triple.object)];
            let problem = UnificationProblem {
                equations: pattern.iter().cloned().zip(nodes).collect(),
                type_prefix: Vec::new(),
            };
            match self.unifier.solve_equations(problem) {
                Ok(mgu) => {
                    let combined = subst.compose(&mgu);
                    if self.prove(rest, &combined, depth + 1, path, emit)?.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
                Err(e) if e.is_failure() => continue,
                Err(e) => return Err(SolveError::from_unify(e)),
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    /// `instance_of(X, Class)`: checks a ground name or enumerates the
    /// class's instances in lexicographic order.
    fn builtin_instance_of(
        &mut self,
        lit: &Literal,
        rest: &[Literal],
        subst: &Substitution,
        depth: usize,
        path: &Path<'_>,
        emit: &mut Emit<'_>,
    ) -> Result<ControlFlow<()>, SolveError> {
        self.steps += 1;
        let shown = || lit.pretty(self.registry.prefixes()).to_string();
        let class = match &lit.atom.args[1] {
            Term::Const(c) => TypeRef::new(&self.resolve_name(&c.name)),
            _ => return Err(SolveError::Instantiation(shown())),
        };
        match &lit.atom.args[0] {
            Term::Const(c) => {
                // A typed constant passes on its annotation alone, so terms
                // the ontology never mentions can still satisfy the guard.
                let ok = (!c.ty.is_top() && self.registry.is_subtype_of(&c.ty, &class)?)
                    || self.registry.is_instance_of(&self.resolve_name(&c.name), &class)?;
                if ok {
                    self.prove(rest, subst, depth + 1, path, emit)
                } else {
                    Ok(ControlFlow::Continue(()))
                }
            }
            x @ Term::Var(_) => {
                for name in self.registry.instances_of(&class)? {
                    let candidate = Term::typed_constant(&name, class.clone());
                    match self.unifier.unify(x, &candidate) {
                        Ok(mgu) => {
                            let combined = subst.compose(&mgu);
                            if self.prove(rest, &combined, depth + 1, path, emit)?.is_break() {
                                return Ok(ControlFlow::Break(()));
                            }
                        }
                        Err(e) if e.is_failure() => continue,
                        Err(e) => return Err(SolveError::from_unify(e)),
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
            Term::Compound(_) => {
                Err(SolveError::Builtin(format!("cannot test a function term in {}", shown())))
            }
        }
    }

    /// Prefix-resolves a constant name, so quoted tokens like `"rdf_type"`
    /// match full IRIs inside builtins.
    fn resolve_name(&self, name: &str) -> String {
        self.registry
            .prefixes()
            .resolve_underscore(name)
            .unwrap_or_else(|| name.to_string())
    }

    fn resolve_constants(&self, t: &Term) -> Term {
        match t {
            Term::Const(c) => {
                let resolved = self.resolve_name(&c.name);
                if *resolved == *c.name {
                    t.clone()
                } else {
                    Term::typed_constant(&resolved, c.ty.clone())
                }
            }
            _ => t.clone(),
        }
    }
}

fn node_term(node: &Node) -> Term {
    match node {
        Node::Iri(iri) => Term::constant(iri),
        Node::Literal(text) => Term::constant(text),
        Node::Blank(label) => Term::constant(&format!("_:{label}")),
    }
}
