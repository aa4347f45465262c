//! Order-sorted unification.
//!
//! Equations are transformed Martelli-Montanari style: erase trivial
//! equations, decompose compounds, orient so variables sit on the left, bind
//! with an occurs check. On top of that, annotations take part:
//!
//! * two typed variables merge at `lower` of their types, failing when the
//!   meet is bottom;
//! * a typed variable accepts a constant only if the constant's type is a
//!   subtype of the variable's (an untyped constant needs the registry to
//!   confirm the instance relationship);
//! * a typed variable accepts a compound only if the functor's declared
//!   result type is a subtype of the variable's type, and arguments must fit
//!   the declared argument sorts;
//! * two constants are equal iff they name the same individual and their
//!   types are equal up to equivalence.
//!
//! Untyped terms never touch the registry, so plain unification runs at
//! plain cost. Failures carry the reason: functor clash, occurs check,
//! constant type, empty lower bound, or an ill-typed function application.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::registry::{RegistryError, TypeRegistry};
use crate::sorts::TypeRef;
use crate::subst::Substitution;
use crate::term::{Atom, Compound, Constant, Term, VarKey};

#[derive(Debug, Error)]
pub enum UnifyError {
    #[error("clash: {0} does not match {1}")]
    Clash(String, String),
    #[error("occurs check: {var:?} occurs in {term}")]
    Occurs { var: VarKey, term: String },
    #[error("constant {constant} is not of type {required}")]
    ConstantType { constant: String, required: TypeRef },
    #[error("types {0} and {1} have an empty lower bound")]
    EmptyLower(TypeRef, TypeRef),
    #[error("ill-typed function application: {0}")]
    IllTypedFunction(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

impl UnifyError {
    /// True for ordinary unification failure, false for infrastructure
    /// errors that should abort a solve instead of failing a branch.
    pub fn is_failure(&self) -> bool {
        !matches!(self, UnifyError::Registry(_))
    }
}

/// A set of equations together with the type restrictions on the variables
/// involved.
#[derive(Clone, Debug, Default)]
pub struct UnificationProblem {
    pub equations: Vec<(Term, Term)>,
    pub type_prefix: Vec<(VarKey, TypeRef)>,
}

impl UnificationProblem {
    pub fn of_terms(t1: &Term, t2: &Term) -> Self {
        UnificationProblem { equations: vec![(t1.clone(), t2.clone())], type_prefix: Vec::new() }
    }
}

/// Effective type of a term: its annotation for variables and constants, the
/// declared result type (top if undeclared) for compounds.
pub fn effective_type(t: &Term, registry: &TypeRegistry) -> TypeRef {
    match t {
        Term::Var(v) => v.ty.clone(),
        Term::Const(c) => c.ty.clone(),
        Term::Compound(c) => registry.compound_type(&c.functor, c.args.len()),
    }
}

pub struct Unifier<'a> {
    registry: &'a TypeRegistry,
}

impl<'a> Unifier<'a> {
    pub fn new(registry: &'a TypeRegistry) -> Self {
        Unifier { registry }
    }

    pub fn registry(&self) -> &TypeRegistry {
        self.registry
    }

    pub fn unify(&self, t1: &Term, t2: &Term) -> Result<Substitution, UnifyError> {
        self.solve_equations(UnificationProblem::of_terms(t1, t2))
    }

    /// Unifies two atoms argument by argument; predicate and arity must
    /// already agree.
    pub fn unify_atoms(&self, a1: &Atom, a2: &Atom) -> Result<Substitution, UnifyError> {
        if a1.pred != a2.pred || a1.args.len() != a2.args.len() {
            return Err(UnifyError::Clash(a1.to_string(), a2.to_string()));
        }
        let problem = UnificationProblem {
            equations: a1.args.iter().cloned().zip(a2.args.iter().cloned()).collect(),
            type_prefix: Vec::new(),
        };
        self.solve_equations(problem)
    }

    /// Transforms the problem to solved form, leftmost equation first.
    pub fn solve_equations(&self, problem: UnificationProblem) -> Result<Substitution, UnifyError> {
        let mut work = Work {
            registry: self.registry,
            queue: problem.equations.into(),
            prefix: BTreeMap::new(),
            declared: BTreeMap::new(),
            subst: Substitution::new(),
        };
        for (key, ty) in problem.type_prefix {
            work.restrict(key, ty)?;
        }
        let snapshot: Vec<(Term, Term)> = work.queue.iter().cloned().collect();
        for (l, r) in &snapshot {
            work.collect_annotations(l)?;
            work.collect_annotations(r)?;
        }
        work.run()
    }
}

struct Work<'a> {
    registry: &'a TypeRegistry,
    queue: VecDeque<(Term, Term)>,
    /// Current type of each live variable.
    prefix: BTreeMap<VarKey, TypeRef>,
    /// Type each variable entered the problem with, for narrowing reports.
    declared: BTreeMap<VarKey, TypeRef>,
    subst: Substitution,
}

impl Work<'_> {
    /// Meets `ty` into the running restriction for `key`. A variable written
    /// with two incompatible annotations fails immediately.
    fn restrict(&mut self, key: VarKey, ty: TypeRef) -> Result<(), UnifyError> {
        self.declared.entry(key.clone()).or_insert_with(|| ty.clone());
        let current = self.prefix.get(&key).cloned().unwrap_or_else(TypeRef::top);
        let met = if current.is_top() {
            ty
        } else if ty.is_top() || ty == current {
            current
        } else {
            let met = self.registry.lower(&current, &ty)?;
            if met.is_bottom() {
                return Err(UnifyError::EmptyLower(current, ty));
            }
            met
        };
        self.prefix.insert(key, met);
        Ok(())
    }

    fn collect_annotations(&mut self, t: &Term) -> Result<(), UnifyError> {
        match t {
            Term::Var(v) => self.restrict(v.key.clone(), v.ty.clone()),
            Term::Const(_) => Ok(()),
            Term::Compound(c) => {
                for a in &c.args {
                    self.collect_annotations(a)?;
                }
                Ok(())
            }
        }
    }

    fn var_type(&self, key: &VarKey) -> TypeRef {
        self.prefix.get(key).cloned().unwrap_or_else(TypeRef::top)
    }

    fn run(mut self) -> Result<Substitution, UnifyError> {
        while let Some((l, r)) = self.queue.pop_front() {
            let l = self.subst.apply_term(&l);
            let r = self.subst.apply_term(&r);
            self.step(l, r)?;
        }
        // Record every narrowing relative to the declared annotations.
        for (key, ty) in &self.prefix {
            let declared = self.declared.get(key).cloned().unwrap_or_else(TypeRef::top);
            if *ty != declared {
                self.subst.narrow_type(key.clone(), ty.clone());
            }
        }
        Ok(self.subst)
    }

    fn step(&mut self, l: Term, r: Term) -> Result<(), UnifyError> {
        match (l, r) {
            (Term::Var(x), Term::Var(y)) if x.key == y.key => Ok(()),
            (Term::Var(x), Term::Var(y)) => {
                let r1 = self.var_type(&x.key);
                let r2 = self.var_type(&y.key);
                let met = if r1.is_top() && r2.is_top() {
                    TypeRef::top()
                } else {
                    let met = self.registry.lower(&r1, &r2)?;
                    if met.is_bottom() {
                        return Err(UnifyError::EmptyLower(r1, r2));
                    }
                    met
                };
                self.prefix.insert(y.key.clone(), met.clone());
                self.bind(x.key, Term::var_key(y.key, met))
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => self.bind_var_nonvar(x.key, t),
            (Term::Const(c1), Term::Const(c2)) => self.constants(c1, c2),
            (Term::Compound(f1), Term::Compound(f2)) => self.decompose(f1, f2),
            (l @ Term::Const(_), r @ Term::Compound(_))
            | (l @ Term::Compound(_), r @ Term::Const(_)) => {
                Err(UnifyError::Clash(l.to_string(), r.to_string()))
            }
        }
    }

    fn bind_var_nonvar(&mut self, key: VarKey, t: Term) -> Result<(), UnifyError> {
        let r1 = self.var_type(&key);
        match &t {
            Term::Const(c) => {
                if !c.ty.is_top() {
                    if !r1.is_top() && !self.registry.is_subtype_of(&c.ty, &r1)? {
                        return Err(UnifyError::ConstantType {
                            constant: t.to_string(),
                            required: r1,
                        });
                    }
                    self.prefix.insert(key.clone(), c.ty.clone());
                } else if !r1.is_top() {
                    if !self.registry.is_instance_of(&c.name, &r1)? {
                        return Err(UnifyError::ConstantType {
                            constant: t.to_string(),
                            required: r1,
                        });
                    }
                }
            }
            Term::Compound(f) => {
                if t.contains_var(&key) {
                    return Err(UnifyError::Occurs { var: key, term: t.to_string() });
                }
                let rf = self.registry.compound_type(&f.functor, f.args.len());
                if !r1.is_top() {
                    if rf.is_top() {
                        return Err(UnifyError::IllTypedFunction(format!(
                            "untyped term {t} cannot be bound to a variable of type {r1}"
                        )));
                    }
                    if !self.registry.is_subtype_of(&rf, &r1)? {
                        return Err(UnifyError::IllTypedFunction(format!(
                            "{}/{} yields {rf}, not a subtype of {r1}",
                            f.functor,
                            f.args.len()
                        )));
                    }
                }
                if !rf.is_top() {
                    self.prefix.insert(key.clone(), rf);
                }
                self.check_well_typed(f)?;
            }
            Term::Var(_) => unreachable!("variable pairs handled in step"),
        }
        self.bind(key, t)
    }

    /// Enforces declared argument sorts on a compound: constants must be
    /// subtypes (or confirmed instances), variables narrow to the declared
    /// sort, nested compounds must yield a subtype. Recurses into arguments.
    fn check_well_typed(&mut self, f: &Compound) -> Result<(), UnifyError> {
        if let Some(fs) = self.registry.function_sort(&f.functor, f.args.len()).cloned() {
            for (arg, want) in f.args.iter().zip(&fs.arg_types) {
                if want.is_top() {
                    continue;
                }
                match arg {
                    Term::Var(v) => {
                        let cur = self.var_type(&v.key);
                        let met = self.registry.lower(&cur, want)?;
                        if met.is_bottom() {
                            return Err(UnifyError::IllTypedFunction(format!(
                                "argument {arg} of {} cannot have type {want}",
                                f.functor
                            )));
                        }
                        self.declared.entry(v.key.clone()).or_insert_with(|| v.ty.clone());
                        self.prefix.insert(v.key.clone(), met);
                    }
                    Term::Const(c) => {
                        let ok = if c.ty.is_top() {
                            self.registry.is_instance_of(&c.name, want)?
                        } else {
                            self.registry.is_subtype_of(&c.ty, want)?
                        };
                        if !ok {
                            return Err(UnifyError::IllTypedFunction(format!(
                                "argument {arg} of {} is not of type {want}",
                                f.functor
                            )));
                        }
                    }
                    Term::Compound(inner) => {
                        let it = self.registry.compound_type(&inner.functor, inner.args.len());
                        if it.is_top() || !self.registry.is_subtype_of(&it, want)? {
                            return Err(UnifyError::IllTypedFunction(format!(
                                "argument {arg} of {} is not of type {want}",
                                f.functor
                            )));
                        }
                    }
                }
            }
        }
        for arg in &f.args {
            if let Term::Compound(inner) = arg {
                self.check_well_typed(inner)?;
            }
        }
        Ok(())
    }

    fn constants(&mut self, c1: Constant, c2: Constant) -> Result<(), UnifyError> {
        let same_name = c1.name == c2.name || self.registry.same_individual(&c1.name, &c2.name);
        if !same_name {
            return Err(UnifyError::Clash(
                Term::Const(c1).to_string(),
                Term::Const(c2).to_string(),
            ));
        }
        if c1.ty == c2.ty {
            return Ok(());
        }
        // An untyped occurrence of an individual meets a typed one whenever
        // the ontology puts the individual in that sort.
        if c1.ty.is_top() || c2.ty.is_top() {
            let (name, required) = if c1.ty.is_top() {
                (&c1.name, c2.ty.clone())
            } else {
                (&c2.name, c1.ty.clone())
            };
            if self.registry.is_instance_of(name, &required)? {
                return Ok(());
            }
            return Err(UnifyError::ConstantType {
                constant: Term::Const(c1).to_string(),
                required,
            });
        }
        if !self.registry.is_equivalent(&c1.ty, &c2.ty)? {
            return Err(UnifyError::ConstantType {
                constant: Term::Const(c1).to_string(),
                required: c2.ty,
            });
        }
        Ok(())
    }

    fn decompose(&mut self, f1: Compound, f2: Compound) -> Result<(), UnifyError> {
        if f1.functor != f2.functor || f1.args.len() != f2.args.len() {
            return Err(UnifyError::Clash(
                Term::Compound(f1).to_string(),
                Term::Compound(f2).to_string(),
            ));
        }
        self.check_well_typed(&f1)?;
        self.check_well_typed(&f2)?;
        let pairs: Vec<(Term, Term)> =
            f1.args.into_iter().zip(f2.args).collect();
        for pair in pairs.into_iter().rev() {
            self.queue.push_front(pair);
        }
        Ok(())
    }

    fn bind(&mut self, key: VarKey, t: Term) -> Result<(), UnifyError> {
        if t.contains_var(&key) {
            return Err(UnifyError::Occurs { var: key, term: t.to_string() });
        }
        self.subst.bind(key, t);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::reference::{alpha_equivalent, robinson_unify};

    const VIN: &str = "http://example.org/vin#";
    const ONTOLOGY: &str = "\
<http://example.org/vin#White_Wine> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://example.org/vin#Wine> .
<http://example.org/vin#Red_Wine> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://example.org/vin#Wine> .
<http://example.org/vin#Chardonnay> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.org/vin#White_Wine> .
<http://example.org/vin#Merlot> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.org/vin#Red_Wine> .
<http://example.org/vin#Port> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.org/vin#Wine> .
<http://example.org/vin#TheMerlot> <http://www.w3.org/2002/07/owl#sameAs> <http://example.org/vin#Merlot> .
<http://example.org/cust#Customer> <http://www.w3.org/2002/07/owl#equivalentClass> <http://example.org/cust#Client> .
<http://example.org/money#Dollar> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .
";

    fn vin(local: &str) -> TypeRef {
        TypeRef::new(&format!("{VIN}{local}"))
    }

    fn dollar() -> TypeRef {
        TypeRef::new("http://example.org/money#Dollar")
    }

    fn individual(local: &str) -> Term {
        Term::constant(&format!("{VIN}{local}"))
    }

    fn typed_individual(local: &str, ty: TypeRef) -> Term {
        Term::typed_constant(&format!("{VIN}{local}"), ty)
    }

    fn reg() -> TypeRegistry {
        let mut reg = TypeRegistry::new();
        reg.load_ontology("test", ONTOLOGY).unwrap();
        reg.declare_function_sort("price", vec![vin("Wine")], dollar()).unwrap();
        reg
    }

    #[test]
    fn untyped_unification_matches_robinson_and_never_queries() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let t1 = Term::compound("f", vec![Term::var("X"), Term::compound("g", vec![Term::var("Y")])]);
        let t2 = Term::compound("f", vec![Term::constant("a"), Term::compound("g", vec![Term::var("X")])]);
        let before = reg.query_count();
        let s = u.unify(&t1, &t2).unwrap();
        assert_eq!(reg.query_count(), before, "untyped terms must not consult the registry");
        assert_eq!(s.apply_term(&Term::var("X")), Term::constant("a"));
        assert_eq!(s.apply_term(&Term::var("Y")), Term::constant("a"));
        assert_eq!(s.apply_term(&t1), s.apply_term(&t2));
        assert!(robinson_unify(&t1, &t2).is_some());
    }

    #[test]
    fn occurs_check_fires_before_types() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let err = u.unify(&Term::var("X"), &Term::compound("f", vec![Term::var("X")])).unwrap_err();
        assert!(matches!(err, UnifyError::Occurs { .. }));
        let nested = Term::compound("f", vec![Term::compound("g", vec![Term::var("X")])]);
        let err = u
            .unify(&Term::typed_var("X", vin("Wine")), &nested)
            .unwrap_err();
        assert!(matches!(err, UnifyError::Occurs { .. }));
    }

    #[test]
    fn functor_and_arity_clashes() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let fa = Term::compound("f", vec![Term::constant("a")]);
        let ga = Term::compound("g", vec![Term::constant("a")]);
        let fab = Term::compound("f", vec![Term::constant("a"), Term::constant("b")]);
        assert!(matches!(u.unify(&fa, &ga).unwrap_err(), UnifyError::Clash(..)));
        assert!(matches!(u.unify(&fa, &fab).unwrap_err(), UnifyError::Clash(..)));
        assert!(matches!(u.unify(&fa, &Term::constant("a")).unwrap_err(), UnifyError::Clash(..)));
    }

    #[test]
    fn typed_variable_pair_merges_at_lower_type() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let x = Term::typed_var("X", vin("Wine"));
        let z = Term::typed_var("Z", vin("White_Wine"));
        let s = u.unify(&x, &z).unwrap();
        let bound = s.apply_term(&Term::var("X"));
        let v = bound.as_var().expect("X should map to a variable");
        assert_eq!(v.ty, vin("White_Wine"));

        // Same merge in the other direction.
        let s = u.unify(&z, &x).unwrap();
        let bound = s.apply_term(&Term::var("Z"));
        assert_eq!(bound.as_var().unwrap().ty, vin("White_Wine"));
        assert_eq!(s.type_update(&VarKey::new("X")), Some(&vin("White_Wine")));
    }

    #[test]
    fn incomparable_variable_types_fail_with_empty_lower() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let err = u
            .unify(&Term::typed_var("X", vin("Red_Wine")), &Term::typed_var("Y", vin("White_Wine")))
            .unwrap_err();
        assert!(matches!(err, UnifyError::EmptyLower(..)));
    }

    #[test]
    fn typed_variable_accepts_subtype_constant_only() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let x = Term::typed_var("X", vin("Wine"));
        let chardonnay = typed_individual("Chardonnay", vin("White_Wine"));
        let s = u.unify(&x, &chardonnay).unwrap();
        let bound = s.apply_term(&Term::var("X"));
        assert_eq!(bound.as_const().unwrap().ty, vin("White_Wine"));

        // Strict supertype annotation is rejected.
        let narrow = Term::typed_var("X", vin("White_Wine"));
        let port = typed_individual("Port", vin("Wine"));
        let err = u.unify(&narrow, &port).unwrap_err();
        assert!(matches!(err, UnifyError::ConstantType { .. }));

        // Incomparable annotation is rejected too.
        let err = u.unify(&Term::typed_var("X", dollar()), &chardonnay).unwrap_err();
        assert!(matches!(err, UnifyError::ConstantType { .. }));
    }

    #[test]
    fn untyped_variable_assumes_type_for_free() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let before = reg.query_count();
        let s = u.unify(&Term::var("Y"), &typed_individual("Chardonnay", vin("White_Wine"))).unwrap();
        let bound = s.apply_term(&Term::var("Y"));
        assert_eq!(bound.as_const().unwrap().ty, vin("White_Wine"));

        let s = u.unify(&Term::var("Y"), &Term::typed_var("X", vin("Wine"))).unwrap();
        assert_eq!(s.apply_term(&Term::var("Y")).as_var().unwrap().ty, vin("Wine"));
        assert_eq!(reg.query_count(), before, "assuming a type costs no queries");
    }

    #[test]
    fn typed_variable_takes_known_untyped_individual() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let x = Term::typed_var("X", vin("Wine"));
        let before = reg.query_count();
        let s = u.unify(&x, &individual("Merlot")).unwrap();
        assert_eq!(reg.query_count() - before, 1, "one instance check");
        assert!(s.apply_term(&Term::var("X")).as_const().is_some());
        // The variable keeps its own type: the constant brought none.
        assert_eq!(s.type_update(&VarKey::new("X")), None);

        let err = u.unify(&x, &Term::constant("bob")).unwrap_err();
        assert!(matches!(err, UnifyError::ConstantType { .. }));
    }

    #[test]
    fn constants_compare_by_individual_and_type_equivalence() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let chardonnay = typed_individual("Chardonnay", vin("White_Wine"));
        assert!(u.unify(&chardonnay, &chardonnay.clone()).is_ok());

        // Same individual, equal types only up to equivalence.
        let c1 = Term::typed_constant("http://example.org/cust#jones", TypeRef::new("http://example.org/cust#Customer"));
        let c2 = Term::typed_constant("http://example.org/cust#jones", TypeRef::new("http://example.org/cust#Client"));
        assert!(u.unify(&c1, &c2).is_ok());

        // Same individual, strictly different types.
        let loose = typed_individual("Chardonnay", vin("Wine"));
        let err = u.unify(&chardonnay, &loose).unwrap_err();
        assert!(matches!(err, UnifyError::ConstantType { .. }));

        // Different individuals clash regardless of types.
        let merlot = typed_individual("Merlot", vin("White_Wine"));
        let err = u.unify(&chardonnay, &merlot).unwrap_err();
        assert!(matches!(err, UnifyError::Clash(..)));

        // Names declared equal unify.
        let a = typed_individual("Merlot", vin("Red_Wine"));
        let b = typed_individual("TheMerlot", vin("Red_Wine"));
        assert!(u.unify(&a, &b).is_ok());
    }

    #[test]
    fn untyped_constant_meets_typed_occurrence_through_the_ontology() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let typed = typed_individual("Merlot", vin("Red_Wine"));
        let plain = individual("Merlot");
        assert!(u.unify(&typed, &plain).is_ok());
        assert!(u.unify(&plain, &typed).is_ok());

        // The ontology does not put Merlot in White_Wine.
        let wrong = typed_individual("Merlot", vin("White_Wine"));
        let err = u.unify(&wrong, &plain).unwrap_err();
        assert!(matches!(err, UnifyError::ConstantType { .. }));

        // Unknown individuals have no sort to assume.
        let unknown = Term::constant("nowhere");
        let x = Term::typed_constant("nowhere", vin("Wine"));
        assert!(u.unify(&x, &unknown).is_err());
    }

    #[test]
    fn undeclared_compound_cannot_bind_typed_variable() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let f = Term::compound("f", vec![Term::constant("a")]);
        let err = u.unify(&Term::typed_var("X", vin("Wine")), &f).unwrap_err();
        assert!(matches!(err, UnifyError::IllTypedFunction(_)));
        // An untyped variable takes it without complaint.
        assert!(u.unify(&Term::var("X"), &f).is_ok());
    }

    #[test]
    fn declared_function_result_must_fit_variable_type() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let call = Term::compound("price", vec![typed_individual("Merlot", vin("Red_Wine"))]);
        let s = u.unify(&Term::typed_var("X", dollar()), &call).unwrap();
        assert!(matches!(s.apply_term(&Term::var("X")), Term::Compound(_)));
        assert_eq!(s.type_update(&VarKey::new("X")), None, "result type equals the annotation");

        let err = u.unify(&Term::typed_var("X", vin("Wine")), &call).unwrap_err();
        assert!(matches!(err, UnifyError::IllTypedFunction(_)));
    }

    #[test]
    fn function_arguments_respect_declared_sorts() {
        let reg = reg();
        let u = Unifier::new(&reg);

        // A variable argument narrows to the declared sort.
        let open = Term::compound("price", vec![Term::var("Y")]);
        let s = u.unify(&Term::var("Z"), &open).unwrap();
        assert_eq!(s.type_update(&VarKey::new("Y")), Some(&vin("Wine")));

        // A constant argument outside the sort is rejected even when the
        // other side is an untyped variable.
        let bad = Term::compound("price", vec![Term::typed_constant("http://example.org/money#ten", dollar())]);
        let err = u.unify(&Term::var("Z"), &bad).unwrap_err();
        assert!(matches!(err, UnifyError::IllTypedFunction(_)));

        // Decomposition checks both sides before pairing arguments.
        let lhs = Term::compound("price", vec![typed_individual("Chardonnay", vin("White_Wine"))]);
        let rhs = Term::compound("price", vec![Term::var("W")]);
        let s = u.unify(&lhs, &rhs).unwrap();
        assert_eq!(s.apply_term(&Term::var("W")).as_const().unwrap().ty, vin("White_Wine"));
    }

    #[test]
    fn repeated_variable_annotations_meet() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let s = u
            .unify(&Term::typed_var("X", vin("Wine")), &Term::typed_var("X", vin("White_Wine")))
            .unwrap();
        assert_eq!(s.type_update(&VarKey::new("X")), Some(&vin("White_Wine")));

        let err = u
            .unify(&Term::typed_var("X", vin("Red_Wine")), &Term::typed_var("X", vin("White_Wine")))
            .unwrap_err();
        assert!(matches!(err, UnifyError::EmptyLower(..)));
    }

    #[test]
    fn atom_unification_requires_matching_predicate() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let p1 = Atom::new("p", vec![Term::var("X"), Term::constant("b")]);
        let p2 = Atom::new("p", vec![Term::constant("a"), Term::var("Y")]);
        let s = u.unify_atoms(&p1, &p2).unwrap();
        assert_eq!(s.apply_atom(&p1), s.apply_atom(&p2));

        let q = Atom::new("q", vec![Term::var("X"), Term::constant("b")]);
        assert!(matches!(u.unify_atoms(&p1, &q).unwrap_err(), UnifyError::Clash(..)));
        let short = Atom::new("p", vec![Term::var("X")]);
        assert!(matches!(u.unify_atoms(&p1, &short).unwrap_err(), UnifyError::Clash(..)));
    }

    #[test]
    fn unification_is_symmetric_in_success() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let cases = vec![
            (Term::typed_var("X", vin("Wine")), typed_individual("Chardonnay", vin("White_Wine"))),
            (Term::typed_var("X", vin("White_Wine")), typed_individual("Port", vin("Wine"))),
            (Term::typed_var("X", vin("Red_Wine")), Term::typed_var("Y", vin("White_Wine"))),
            (Term::typed_var("X", vin("Wine")), Term::typed_var("Y", vin("White_Wine"))),
            (Term::var("X"), Term::compound("price", vec![Term::var("Y")])),
            (Term::typed_var("X", dollar()), Term::compound("price", vec![individual("Merlot")])),
            (individual("Merlot"), individual("TheMerlot")),
            (individual("Merlot"), individual("Chardonnay")),
            (Term::typed_var("X", vin("Wine")), individual("Merlot")),
            (Term::var("X"), Term::var("Y")),
        ];
        for (a, b) in cases {
            let fwd = u.unify(&a, &b).is_ok();
            let bwd = u.unify(&b, &a).is_ok();
            assert_eq!(fwd, bwd, "symmetry broke on {a} vs {b}");
        }
    }

    #[test]
    fn random_untyped_terms_agree_with_reference_unifier() {
        let reg = reg();
        let u = Unifier::new(&reg);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let before = reg.query_count();
        let mut successes = 0usize;
        for _ in 0..300 {
            let t1 = random_term(&mut rng, 0);
            let t2 = random_term(&mut rng, 0);
            let ours = u.unify(&t1, &t2);
            let theirs = robinson_unify(&t1, &t2);
            assert_eq!(
                ours.is_ok(),
                theirs.is_some(),
                "disagreement on {t1} vs {t2}"
            );
            if let Ok(s) = ours {
                successes += 1;
                let a1 = s.apply_term(&t1);
                let a2 = s.apply_term(&t2);
                assert_eq!(a1, a2, "not a unifier for {t1} vs {t2}");
                assert_eq!(s.apply_term(&a1), a1, "substitution not idempotent");
                let r = theirs.unwrap();
                assert!(
                    alpha_equivalent(&r.apply_term(&t1), &a1),
                    "different most general unifier on {t1} vs {t2}"
                );
            }
        }
        assert!(successes > 30, "seed produced too few successes: {successes}");
        assert_eq!(reg.query_count(), before, "untyped runs must never touch the registry");
    }

    fn random_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
        let cutoff = if depth >= 3 { 6 } else { 10 };
        match rng.random_range(0..cutoff) {
            0..=2 => Term::var(["X", "Y", "Z"][rng.random_range(0..3)]),
            3..=5 => Term::constant(["a", "b", "c"][rng.random_range(0..3)]),
            6..=7 => Term::compound("g", vec![random_term(rng, depth + 1)]),
            _ => Term::compound(
                "f",
                vec![random_term(rng, depth + 1), random_term(rng, depth + 1)],
            ),
        }
    }
}
