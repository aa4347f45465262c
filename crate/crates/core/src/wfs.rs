//! Ground well-founded reference semantics for function-free programs.
//!
//! The solver in [`crate::solver`] is an operational SLDNF search; this
//! module is the declarative yardstick it is measured against. A program is
//! grounded type-respectingly: every variable ranges over the constants that
//! fit its annotation, where "fit" means the registry confirms membership or
//! the constant's own program annotation is a subtype. Builtins (`=`,
//! comparisons, `rdf/5`, `instance_of/2`) are two-valued query atoms whose
//! truth is fixed by the frozen registry, so they are evaluated during
//! grounding: a false query literal drops the rule instance, a true one is
//! removed from the body. Comparisons over non-numeric constants are simply
//! not entailed, so such instances drop out quietly instead of erroring the
//! way the runtime search does.
//!
//! Ground atom identity is type-erased and sameAs-canonical: `p(TheMerlot)`
//! and `p(Merlot)` are the same atom when the ontology links the two names.
//! An atom containing a typed constant the registry refutes (a known
//! individual annotated with a class it does not belong to) is ill-typed and
//! excluded from the base: rules needing it positively are dropped, negative
//! occurrences are vacuously true, and interpretations containing it are
//! rejected by [`check_model`].
//!
//! The well-founded model itself is the standard alternating fixpoint: with
//! query atoms folded away the extended unfounded-set conditions reduce to
//! the classical ones.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use indexmap::IndexSet;
use thiserror::Error;

use crate::registry::{ReasonerLevel, RegistryError, TypeRegistry};
use crate::sorts::TypeRef;
use crate::term::{numeric_value, Clause, Literal, Program, Sign, Term, VarKey, COMPARISON_PREDS};
use crate::unify::{UnifyError, Unifier};

#[derive(Debug, Error)]
pub enum WfsError {
    #[error("the ground oracle needs a function-free program, found {0}")]
    NotDatalog(String),
    #[error("grounding {0} would exceed {1} instances")]
    TooLarge(String, usize),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// One ground rule over atom indices of the owning [`GroundProgram`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundRule {
    pub head: usize,
    pub pos: Vec<usize>,
    pub neg: Vec<usize>,
}

/// A finite ground program: the well-typed atoms it mentions and its rule
/// instances, with query atoms already folded away.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    atoms: IndexSet<Arc<str>>,
    rules: Vec<GroundRule>,
}

impl GroundProgram {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.atoms.iter().map(|a| a.as_ref())
    }

    pub fn atom(&self, idx: usize) -> &str {
        &self.atoms[idx]
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.atoms.get_index_of(key)
    }

    pub fn rules(&self) -> &[GroundRule] {
        &self.rules
    }

    fn intern(&mut self, key: String) -> usize {
        self.atoms.insert_full(Arc::from(key.as_str())).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthValue {
    True,
    False,
    Undefined,
}

/// Total three-valued partition of the ground atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WellFoundedModel {
    pub true_atoms: BTreeSet<Arc<str>>,
    pub undefined_atoms: BTreeSet<Arc<str>>,
    pub false_atoms: BTreeSet<Arc<str>>,
}

impl WellFoundedModel {
    /// Truth of an atom key; anything outside the base is false.
    pub fn value(&self, key: &str) -> TruthValue {
        if self.true_atoms.contains(key) {
            TruthValue::True
        } else if self.undefined_atoms.contains(key) {
            TruthValue::Undefined
        } else {
            TruthValue::False
        }
    }
}

/// Goal instances by truth value; keys come from [`bindings_key`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoalAnswers {
    pub true_keys: BTreeSet<String>,
    pub undefined_keys: BTreeSet<String>,
}

/// Canonical answer identity: goal variables in first-occurrence order with
/// their bound names replaced by sameAs representatives.
pub fn bindings_key<'p, I>(registry: &TypeRegistry, pairs: I) -> String
where
    I: IntoIterator<Item = (&'p VarKey, &'p str)>,
{
    let mut out = String::new();
    for (i, (var, name)) in pairs.into_iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} = {}", var.name, registry.canonical_individual(name));
    }
    out
}

/// True iff `atoms` (a set of atom keys from `gp`) is a two-valued model:
/// every rule with a satisfied body has its head in the set, and every
/// member belongs to the well-typed base.
pub fn check_model(gp: &GroundProgram, atoms: &BTreeSet<String>) -> bool {
    let mut truth = vec![false; gp.atom_count()];
    for key in atoms {
        match gp.index_of(key) {
            Some(i) => truth[i] = true,
            // Outside the base means ill-typed or never mentioned.
            None => return false,
        }
    }
    gp.rules.iter().all(|r| {
        let fires = r.pos.iter().all(|&a| truth[a]) && r.neg.iter().all(|&a| !truth[a]);
        !fires || truth[r.head]
    })
}

pub struct Oracle<'a> {
    registry: &'a TypeRegistry,
    exhaustive: bool,
    max_instances: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(registry: &'a TypeRegistry) -> Self {
        Oracle { registry, exhaustive: false, max_instances: 2_000_000 }
    }

    /// Ground every clause instead of only those reachable from the goal.
    pub fn exhaustive(mut self, on: bool) -> Self {
        self.exhaustive = on;
        self
    }

    /// Type-respecting grounding of `program`, pruned to the predicates
    /// reachable from `goal` unless exhaustive grounding is on.
    pub fn ground(
        &self,
        program: &Program,
        goal: Option<&Clause>,
    ) -> Result<GroundProgram, WfsError> {
        let pool = self.constant_pool(program, goal)?;
        let keep = self.reachable_heads(program, goal);
        let mut gp = GroundProgram::default();

        for clause in &program.clauses {
            let Some(head) = &clause.head else { continue };
            if !keep.contains(&(head.sign, Arc::clone(&head.atom.pred))) {
                continue;
            }
            self.ground_clause(clause, &pool, &mut gp)?;
        }
        Ok(gp)
    }

    /// The alternating fixpoint over a finite ground program.
    pub fn well_founded(&self, gp: &GroundProgram) -> WellFoundedModel {
        let n = gp.atom_count();
        let mut assumed_true = vec![false; n];
        let (t, u) = loop {
            // Overestimate: negatives are judged against the current
            // underestimate, then the roles swap.
            let over = gamma(n, &gp.rules, &assumed_true);
            let under = gamma(n, &gp.rules, &over);
            if under == assumed_true {
                break (under, over);
            }
            assumed_true = under;
        };

        let mut model = WellFoundedModel::default();
        for (i, key) in gp.atoms.iter().enumerate() {
            let set = if t[i] {
                &mut model.true_atoms
            } else if u[i] {
                &mut model.undefined_atoms
            } else {
                &mut model.false_atoms
            };
            set.insert(Arc::clone(key));
        }
        model
    }

    /// Grounds, solves and reads off the goal's instances: a conjunction is
    /// true when all literals are, undefined when none is false.
    pub fn goal_answers(&self, program: &Program, goal: &Clause) -> Result<GoalAnswers, WfsError> {
        for lit in &goal.body {
            check_datalog_atom(&lit.atom)?;
        }
        let gp = self.ground(program, Some(goal))?;
        let model = self.well_founded(&gp);
        let pool = self.constant_pool(program, Some(goal))?;

        let goal_vars = goal.variables();
        let ordered: Vec<VarKey> = goal_vars.iter().cloned().collect();
        let annotations = variable_annotations(goal);
        let mut choices: Vec<Vec<Arc<str>>> = Vec::with_capacity(ordered.len());
        for var in &ordered {
            let range = self.variable_range(var, &annotations, &pool)?;
            if range.is_empty() {
                return Ok(GoalAnswers::default());
            }
            choices.push(range);
        }

        let mut answers = GoalAnswers::default();
        let mut indices = vec![0usize; choices.len()];
        loop {
            let assignment: HashMap<VarKey, Arc<str>> = ordered
                .iter()
                .cloned()
                .zip(indices.iter().zip(&choices).map(|(&i, c)| Arc::clone(&c[i])))
                .collect();

            let mut verdict = TruthValue::True;
            for lit in &goal.body {
                let value = self.literal_value(lit, &assignment, &model)?;
                verdict = match (verdict, value) {
                    (_, TruthValue::False) | (TruthValue::False, _) => TruthValue::False,
                    (TruthValue::Undefined, _) | (_, TruthValue::Undefined) => {
                        TruthValue::Undefined
                    }
                    _ => TruthValue::True,
                };
                if verdict == TruthValue::False {
                    break;
                }
            }
            if verdict != TruthValue::False {
                let key = bindings_key(
                    self.registry,
                    ordered.iter().map(|v| (v, assignment[v].as_ref())),
                );
                match verdict {
                    TruthValue::True => answers.true_keys.insert(key),
                    _ => answers.undefined_keys.insert(key),
                };
            }
            if !advance(&mut indices, &choices) {
                break;
            }
        }
        Ok(answers)
    }

    /// Three-valued value of one ground-instantiated goal literal.
    fn literal_value(
        &self,
        lit: &Literal,
        assignment: &HashMap<VarKey, Arc<str>>,
        model: &WellFoundedModel,
    ) -> Result<TruthValue, WfsError> {
        let ground = instantiate(lit, assignment);
        let value = if let Some(truth) = self.query_truth(&ground)? {
            if truth {
                TruthValue::True
            } else {
                TruthValue::False
            }
        } else if !self.well_typed(&ground)? {
            TruthValue::False
        } else {
            model.value(&self.atom_key(&ground))
        };
        Ok(if ground.naf {
            match value {
                TruthValue::True => TruthValue::False,
                TruthValue::False => TruthValue::True,
                TruthValue::Undefined => TruthValue::Undefined,
            }
        } else {
            value
        })
    }

    fn ground_clause(
        &self,
        clause: &Clause,
        pool: &ConstantPool,
        gp: &mut GroundProgram,
    ) -> Result<(), WfsError> {
        let head = clause.head.as_ref().expect("grounding needs a head");
        check_datalog_atom(&head.atom)?;
        for lit in &clause.body {
            check_datalog_atom(&lit.atom)?;
        }

        let vars: Vec<VarKey> = clause.variables().into_iter().collect();
        let annotations = variable_annotations(clause);
        let mut choices: Vec<Vec<Arc<str>>> = Vec::with_capacity(vars.len());
        let mut product = 1usize;
        for var in &vars {
            let range = self.variable_range(var, &annotations, pool)?;
            if range.is_empty() {
                return Ok(());
            }
            product = product.saturating_mul(range.len());
            choices.push(range);
        }
        if product > self.max_instances {
            return Err(WfsError::TooLarge(
                head.atom.pred.to_string(),
                self.max_instances,
            ));
        }

        let mut indices = vec![0usize; choices.len()];
        loop {
            let assignment: HashMap<VarKey, Arc<str>> = vars
                .iter()
                .cloned()
                .zip(indices.iter().zip(&choices).map(|(&i, c)| Arc::clone(&c[i])))
                .collect();
            self.ground_instance(head, &clause.body, &assignment, gp)?;
            if !advance(&mut indices, &choices) {
                break;
            }
        }
        Ok(())
    }

    /// Adds one rule instance unless a query literal or type check refutes
    /// it outright.
    fn ground_instance(
        &self,
        head: &Literal,
        body: &[Literal],
        assignment: &HashMap<VarKey, Arc<str>>,
        gp: &mut GroundProgram,
    ) -> Result<(), WfsError> {
        let head_ground = instantiate(head, assignment);
        if !self.well_typed(&head_ground)? {
            return Ok(());
        }

        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for lit in body {
            let ground = instantiate(lit, assignment);
            if let Some(truth) = self.query_truth(&ground)? {
                let holds = if ground.naf { !truth } else { truth };
                if holds {
                    continue;
                }
                return Ok(());
            }
            // An ill-typed atom can never be true: positively it kills the
            // instance, under naf it is vacuously satisfied.
            if !self.well_typed(&ground)? {
                if ground.naf {
                    continue;
                }
                return Ok(());
            }
            let idx = gp.intern(self.atom_key(&ground));
            if ground.naf {
                neg.push(idx);
            } else {
                pos.push(idx);
            }
        }

        let head_idx = gp.intern(self.atom_key(&head_ground));
        gp.rules.push(GroundRule { head: head_idx, pos, neg });
        Ok(())
    }

    /// Truth of a builtin query literal before naf, `None` for ordinary
    /// atoms.
    fn query_truth(&self, ground: &Literal) -> Result<Option<bool>, WfsError> {
        let pred: &str = &ground.atom.pred;
        let args = &ground.atom.args;
        if pred == "=" && args.len() == 2 {
            let unifier = Unifier::new(self.registry);
            return match unifier.unify(&args[0], &args[1]) {
                Ok(_) => Ok(Some(true)),
                Err(e) if e.is_failure() => Ok(Some(false)),
                Err(UnifyError::Registry(r)) => Err(WfsError::Registry(r)),
                Err(_) => unreachable!("is_failure covers every non-registry error"),
            };
        }
        if COMPARISON_PREDS.contains(&pred) && pred != "=" && args.len() == 2 {
            return Ok(Some(self.compare(pred, args)?));
        }
        if pred == "instance_of" && args.len() == 2 {
            let (Term::Const(x), Term::Const(class)) = (&args[0], &args[1]) else {
                return Ok(Some(false));
            };
            let class = TypeRef::new(&self.resolve_name(&class.name));
            let by_annotation =
                !x.ty.is_top() && self.registry.is_subtype_of(&x.ty, &class)?;
            let ok = by_annotation
                || self.registry.is_instance_of(&self.resolve_name(&x.name), &class)?;
            return Ok(Some(ok));
        }
        if pred == "rdf" && args.len() == 5 {
            return Ok(Some(self.rdf_truth(args)?));
        }
        Ok(None)
    }

    fn compare(&self, pred: &str, args: &[Term]) -> Result<bool, WfsError> {
        let mut sides = [0.0f64; 2];
        let mut types = [TypeRef::top(), TypeRef::top()];
        for (i, arg) in args.iter().enumerate() {
            let Term::Const(c) = arg else { return Ok(false) };
            let Some(v) = numeric_value(&c.name) else { return Ok(false) };
            sides[i] = v;
            types[i] = c.ty.clone();
        }
        if !types[0].is_top() && !types[1].is_top() {
            let met = self.registry.lower(&types[0], &types[1])?;
            if met.is_bottom() {
                return Ok(false);
            }
        }
        let [a, b] = sides;
        Ok(match pred {
            ">" => a > b,
            "<" => a < b,
            ">=" => a >= b,
            "=<" => a <= b,
            _ => false,
        })
    }

    fn rdf_truth(&self, args: &[Term]) -> Result<bool, WfsError> {
        let Term::Const(source) = &args[0] else { return Ok(false) };
        let Term::Const(mode) = &args[1] else { return Ok(false) };
        let level = ReasonerLevel::from_mode(&mode.name)?;
        if !self.registry.has_source(&self.resolve_name(&source.name)) {
            return Ok(false);
        }
        let want: Vec<String> = args[2..=4]
            .iter()
            .map(|t| match t {
                Term::Const(c) => self.resolve_name(&c.name),
                other => other.to_string(),
            })
            .collect();
        Ok(self.registry.view_triples(level).iter().any(|t| {
            t.subject.name() == want[0]
                && t.predicate.name() == want[1]
                && t.object.name() == want[2]
        }))
    }

    /// Every typed constant occurrence must be consistent with the
    /// ontology; names the ontology has never seen keep their annotation on
    /// trust.
    fn well_typed(&self, lit: &Literal) -> Result<bool, WfsError> {
        for arg in &lit.atom.args {
            let Term::Const(c) = arg else { continue };
            if c.ty.is_top() {
                continue;
            }
            let name = self.resolve_name(&c.name);
            if self.registry.is_known_individual(&name)
                && !self.registry.is_instance_of(&name, &c.ty)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Type-erased canonical identity of a ground literal (naf excluded,
    /// explicit negation kept).
    fn atom_key(&self, lit: &Literal) -> String {
        let mut out = String::new();
        if lit.sign == Sign::Neg {
            out.push('~');
        }
        out.push_str(&lit.atom.pred);
        if !lit.atom.args.is_empty() {
            out.push('(');
            for (i, arg) in lit.atom.args.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match arg {
                    Term::Const(c) => {
                        let name = self.resolve_name(&c.name);
                        out.push_str(&self.registry.canonical_individual(&name));
                    }
                    other => out.push_str(&other.to_string()),
                }
            }
            out.push(')');
        }
        out
    }

    fn resolve_name(&self, name: &str) -> String {
        self.registry
            .prefixes()
            .resolve_underscore(name)
            .unwrap_or_else(|| name.to_string())
    }

    /// Constants a variable of these annotations ranges over.
    fn variable_range(
        &self,
        var: &VarKey,
        annotations: &HashMap<VarKey, Vec<TypeRef>>,
        pool: &ConstantPool,
    ) -> Result<Vec<Arc<str>>, WfsError> {
        let anns = annotations.get(var).map(Vec::as_slice).unwrap_or(&[]);
        let mut out = Vec::new();
        'names: for name in &pool.names {
            for ann in anns {
                if !self.fits(name, ann, pool)? {
                    continue 'names;
                }
            }
            out.push(Arc::clone(name));
        }
        Ok(out)
    }

    /// Membership test from the grounding definition: the registry confirms
    /// the instance, or some program annotation of the constant is a
    /// subtype of the sort.
    fn fits(&self, name: &str, sort: &TypeRef, pool: &ConstantPool) -> Result<bool, WfsError> {
        if sort.is_top() {
            return Ok(true);
        }
        if self.registry.is_instance_of(name, sort)? {
            return Ok(true);
        }
        if let Some(anns) = pool.annotations.get(name) {
            for ann in anns {
                if self.registry.is_subtype_of(ann, sort)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Combined constant signature: program constants with their
    /// annotations plus every registry individual.
    fn constant_pool(
        &self,
        program: &Program,
        goal: Option<&Clause>,
    ) -> Result<ConstantPool, WfsError> {
        let mut pool = ConstantPool::default();
        let add_term = |t: &Term, pool: &mut ConstantPool| {
            if let Term::Const(c) = t {
                let name: Arc<str> = Arc::from(self.resolve_name(&c.name).as_str());
                pool.names.insert(Arc::clone(&name));
                if !c.ty.is_top() {
                    pool.annotations.entry(name).or_default().push(c.ty.clone());
                }
            }
        };
        let add_clause = |clause: &Clause, pool: &mut ConstantPool| {
            let lits = clause.head.iter().chain(&clause.body);
            for lit in lits {
                for arg in &lit.atom.args {
                    add_term(arg, pool);
                }
            }
        };
        for clause in &program.clauses {
            add_clause(clause, &mut pool);
        }
        if let Some(goal) = goal {
            add_clause(goal, &mut pool);
        }
        for name in self.registry.known_individuals() {
            pool.names.insert(name);
        }
        Ok(pool)
    }

    /// Head signatures kept by relevant grounding: everything when
    /// exhaustive or goalless, otherwise the signatures reachable from the
    /// goal through rule bodies.
    fn reachable_heads(
        &self,
        program: &Program,
        goal: Option<&Clause>,
    ) -> HashSet<(Sign, Arc<str>)> {
        let mut keep = HashSet::new();
        let everything = || {
            program
                .clauses
                .iter()
                .filter_map(|c| c.head.as_ref())
                .map(|h| (h.sign, Arc::clone(&h.atom.pred)))
                .collect::<HashSet<_>>()
        };
        let Some(goal) = goal else { return everything() };
        if self.exhaustive {
            return everything();
        }

        let mut queue: VecDeque<(Sign, Arc<str>)> = goal
            .body
            .iter()
            .map(|l| (l.sign, Arc::clone(&l.atom.pred)))
            .collect();
        while let Some(sig) = queue.pop_front() {
            if !keep.insert(sig.clone()) {
                continue;
            }
            for clause in &program.clauses {
                let Some(head) = &clause.head else { continue };
                if (head.sign, &head.atom.pred) != (sig.0, &sig.1) {
                    continue;
                }
                for lit in &clause.body {
                    queue.push_back((lit.sign, Arc::clone(&lit.atom.pred)));
                }
            }
        }
        keep
    }
}

#[derive(Default)]
struct ConstantPool {
    names: BTreeSet<Arc<str>>,
    annotations: HashMap<Arc<str>, Vec<TypeRef>>,
}

fn check_datalog_atom(atom: &crate::term::Atom) -> Result<(), WfsError> {
    for arg in &atom.args {
        if matches!(arg, Term::Compound(_)) {
            return Err(WfsError::NotDatalog(arg.to_string()));
        }
    }
    Ok(())
}

fn variable_annotations(clause: &Clause) -> HashMap<VarKey, Vec<TypeRef>> {
    let mut out: HashMap<VarKey, Vec<TypeRef>> = HashMap::new();
    for lit in clause.head.iter().chain(&clause.body) {
        for arg in &lit.atom.args {
            if let Term::Var(v) = arg {
                if !v.ty.is_top() {
                    out.entry(v.key.clone()).or_default().push(v.ty.clone());
                }
            }
        }
    }
    out
}

/// Substitutes variables by untyped constants; annotations already did
/// their range-restriction work.
fn instantiate(lit: &Literal, assignment: &HashMap<VarKey, Arc<str>>) -> Literal {
    let args = lit
        .atom
        .args
        .iter()
        .map(|arg| match arg {
            Term::Var(v) => match assignment.get(&v.key) {
                Some(name) => Term::constant(name),
                None => arg.clone(),
            },
            other => other.clone(),
        })
        .collect();
    Literal {
        naf: lit.naf,
        sign: lit.sign,
        atom: crate::term::Atom { pred: Arc::clone(&lit.atom.pred), args },
    }
}

/// Mixed-radix advance; false when the enumeration wrapped around.
fn advance(indices: &mut [usize], choices: &[Vec<Arc<str>>]) -> bool {
    for (i, slot) in indices.iter_mut().enumerate() {
        *slot += 1;
        if *slot < choices[i].len() {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Least model of the reduct: rules whose negative literals all avoid
/// `assume` fire over their positive parts.
fn gamma(n: usize, rules: &[GroundRule], assume: &[bool]) -> Vec<bool> {
    let mut truth = vec![false; n];
    let live: Vec<&GroundRule> =
        rules.iter().filter(|r| r.neg.iter().all(|&a| !assume[a])).collect();
    loop {
        let mut changed = false;
        for r in &live {
            if !truth[r.head] && r.pos.iter().all(|&a| truth[a]) {
                truth[r.head] = true;
                changed = true;
            }
        }
        if !changed {
            return truth;
        }
    }
}
