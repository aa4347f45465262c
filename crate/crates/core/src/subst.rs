//! Substitutions over typed terms.
//!
//! A substitution carries ordinary variable bindings plus the type updates
//! produced by unification: a variable that survives unification may end up
//! with a narrower type than it was declared with, and `apply` installs that
//! narrowed type on the surviving occurrences.

use std::collections::BTreeMap;
use std::fmt;

use crate::sorts::TypeRef;
use crate::term::{Atom, Clause, Compound, Literal, Term, Var, VarKey};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<VarKey, Term>,
    type_updates: BTreeMap<VarKey, TypeRef>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty() && self.type_updates.is_empty()
    }

    pub fn get(&self, key: &VarKey) -> Option<&Term> {
        self.bindings.get(key)
    }

    pub fn type_update(&self, key: &VarKey) -> Option<&TypeRef> {
        self.type_updates.get(key)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&VarKey, &Term)> {
        self.bindings.iter()
    }

    pub fn type_updates(&self) -> impl Iterator<Item = (&VarKey, &TypeRef)> {
        self.type_updates.iter()
    }

    /// Adds `key -> term`, rewriting existing ranges so the result stays
    /// idempotent. `term` must not contain `key` (occurs check is the
    /// unifier's job).
    pub fn bind(&mut self, key: VarKey, term: Term) {
        debug_assert!(!term.contains_var(&key), "binding would not be idempotent");
        let single = Substitution {
            bindings: BTreeMap::from([(key.clone(), term.clone())]),
            type_updates: BTreeMap::new(),
        };
        for t in self.bindings.values_mut() {
            *t = single.apply_term(t);
        }
        self.bindings.insert(key, term);
    }

    /// Records that `key` now has type `ty`. Later updates overwrite earlier
    /// ones; unification only ever narrows, so the last update is the
    /// tightest.
    pub fn narrow_type(&mut self, key: VarKey, ty: TypeRef) {
        self.type_updates.insert(key, ty);
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.bindings.get(&v.key) {
                Some(bound) => self.apply_term(bound),
                None => {
                    let ty = self.type_updates.get(&v.key).cloned().unwrap_or_else(|| v.ty.clone());
                    Term::Var(Var { key: v.key.clone(), ty })
                }
            },
            Term::Const(_) => t.clone(),
            Term::Compound(c) => Term::Compound(Compound {
                functor: c.functor.clone(),
                args: c.args.iter().map(|a| self.apply_term(a)).collect(),
            }),
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.apply_term(t)).collect() }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { naf: l.naf, sign: l.sign, atom: self.apply_atom(&l.atom) }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause {
            head: c.head.as_ref().map(|h| self.apply_literal(h)),
            body: c.body.iter().map(|l| self.apply_literal(l)).collect(),
        }
    }

    /// Sequential composition: applying the result equals applying `self`
    /// then `other`. Identity bindings that arise are dropped. The result is
    /// idempotent as long as `other` does not bind variables back into
    /// `self`'s range, which is how the solver uses it (each step binds only
    /// freshly renamed or goal variables).
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (k, t) in &self.bindings {
            let rewritten = other.apply_term(t);
            if let Term::Var(v) = &rewritten {
                if &v.key == k {
                    continue;
                }
            }
            out.bindings.insert(k.clone(), rewritten);
        }
        for (k, t) in &other.bindings {
            if !self.bindings.contains_key(k) {
                out.bindings.insert(k.clone(), t.clone());
            }
        }
        for (k, ty) in &self.type_updates {
            out.type_updates.insert(k.clone(), ty.clone());
        }
        for (k, ty) in &other.type_updates {
            out.type_updates.insert(k.clone(), ty.clone());
        }
        out
    }

    /// Keeps only entries for the given variables, for answer projection.
    pub fn restricted_to(&self, keys: &indexmap::IndexSet<VarKey>) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| keys.contains(*k))
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect(),
            type_updates: self
                .type_updates
                .iter()
                .filter(|(k, _)| keys.contains(*k))
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (k, t) in &self.bindings {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k:?}/{t}")?;
        }
        for (k, ty) in &self.type_updates {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{k:?}:{ty}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sorts::TypeRef;

    fn v(name: &str) -> VarKey {
        VarKey::new(name)
    }

    #[test]
    fn apply_replaces_and_narrows() {
        let wine = TypeRef::new("http://example.org/wine#Wine");
        let red = TypeRef::new("http://example.org/wine#Red_Wine");
        let mut s = Substitution::new();
        s.bind(v("X"), Term::constant("a"));
        s.narrow_type(v("Y"), red.clone());
        let t = Term::compound("f", vec![Term::var("X"), Term::typed_var("Y", wine)]);
        let applied = s.apply_term(&t);
        assert_eq!(
            applied,
            Term::compound("f", vec![Term::constant("a"), Term::typed_var("Y", red)])
        );
        // Idempotent: applying again changes nothing.
        assert_eq!(s.apply_term(&applied), applied);
    }

    #[test]
    fn bind_keeps_ranges_rewritten() {
        let mut s = Substitution::new();
        s.bind(v("X"), Term::compound("f", vec![Term::var("Y")]));
        s.bind(v("Y"), Term::constant("a"));
        assert_eq!(
            s.get(&v("X")).unwrap(),
            &Term::compound("f", vec![Term::constant("a")])
        );
    }

    // Frozen example: s1 = {X/f(Y)}, s2 = {Y/b}.
    // compose(s1, s2) must be {X/f(b), Y/b}, computed by hand from the
    // defining equation apply(compose(s1, s2), t) = apply(s2, apply(s1, t)).
    #[test]
    fn compose_hand_example() {
        let mut s1 = Substitution::new();
        s1.bind(v("X"), Term::compound("f", vec![Term::var("Y")]));
        let mut s2 = Substitution::new();
        s2.bind(v("Y"), Term::constant("b"));
        let c = s1.compose(&s2);
        assert_eq!(
            c.get(&v("X")).unwrap(),
            &Term::compound("f", vec![Term::constant("b")])
        );
        assert_eq!(c.get(&v("Y")).unwrap(), &Term::constant("b"));
    }

    #[test]
    fn compose_defining_equation_on_examples() {
        let wine = TypeRef::new("http://example.org/wine#Wine");
        let terms = [
            Term::var("X"),
            Term::typed_var("Z", wine.clone()),
            Term::compound("g", vec![Term::var("X"), Term::var("Y"), Term::var("Z")]),
            Term::list(vec![Term::var("Y"), Term::constant("k")], None),
        ];
        let mut s1 = Substitution::new();
        s1.bind(v("X"), Term::compound("h", vec![Term::var("Y")]));
        s1.narrow_type(v("Z"), TypeRef::new("http://example.org/wine#Red_Wine"));
        let mut s2 = Substitution::new();
        s2.bind(v("Y"), Term::constant("c"));
        let comp = s1.compose(&s2);
        for t in &terms {
            assert_eq!(comp.apply_term(t), s2.apply_term(&s1.apply_term(t)), "term {t}");
        }
    }

    #[test]
    fn empty_is_identity_for_compose() {
        let mut s = Substitution::new();
        s.bind(v("X"), Term::constant("a"));
        let e = Substitution::new();
        assert_eq!(s.compose(&e), s);
        assert_eq!(e.compose(&s), s);
    }

    #[test]
    fn identity_bindings_are_dropped() {
        let mut s1 = Substitution::new();
        s1.bind(v("X"), Term::var("Y"));
        let mut s2 = Substitution::new();
        s2.bind(v("Y"), Term::var("X"));
        let c = s1.compose(&s2);
        // X maps through Y back to X: the identity entry disappears.
        assert_eq!(c.get(&v("X")), None);
        assert_eq!(c.get(&v("Y")), Some(&Term::var("X")));
    }
}
