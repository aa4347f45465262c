//! Deliberately naive reference implementations.
//!
//! Each function here answers a question the engine also answers, by the
//! most direct method available: boolean matrix closure, textbook
//! substitution-composing unification, exhaustive model enumeration. Tests
//! cross-check the engine against these on shared inputs. None of this code
//! is called by the engine itself; keeping the two routes independent is the
//! point.

use std::collections::BTreeSet;

use crate::subst::Substitution;
use crate::term::Term;

/// Reflexive-transitive reachability over `edges` on nodes `0..n`, by
/// Floyd-Warshall.
pub fn reachability_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        m[i][i] = true;
    }
    for &(a, b) in edges {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    m
}

/// Classic untyped unification: recursive descent, substitution composition,
/// occurs check. Type annotations are ignored entirely; constants are equal
/// iff their names are.
pub fn robinson_unify(t1: &Term, t2: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    unify_into(t1, t2, &mut s).then_some(s)
}

fn unify_into(t1: &Term, t2: &Term, s: &mut Substitution) -> bool {
    let a = s.apply_term(t1);
    let b = s.apply_term(t2);
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x.key == y.key => true,
        (Term::Var(x), _) => {
            if b.contains_var(&x.key) {
                return false;
            }
            s.bind(x.key.clone(), strip_types(&b));
            true
        }
        (_, Term::Var(_)) => unify_into(&b, &a, s),
        (Term::Const(c1), Term::Const(c2)) => c1.name == c2.name,
        (Term::Compound(f1), Term::Compound(f2)) => {
            if f1.functor != f2.functor || f1.args.len() != f2.args.len() {
                return false;
            }
            f1.args.iter().zip(&f2.args).all(|(x, y)| unify_into(x, y, s))
        }
        _ => false,
    }
}

/// Erases every type annotation, for comparing results modulo types.
pub fn strip_types(t: &Term) -> Term {
    match t {
        Term::Var(v) => Term::var_key(v.key.clone(), crate::sorts::TypeRef::top()),
        Term::Const(c) => Term::constant(&c.name),
        Term::Compound(c) => Term::compound(
            &c.functor,
            c.args.iter().map(strip_types).collect(),
        ),
    }
}

/// True when `s` and `t` are equal up to a bijective variable renaming.
pub fn alpha_equivalent(s: &Term, t: &Term) -> bool {
    fn go(
        s: &Term,
        t: &Term,
        fwd: &mut std::collections::HashMap<crate::term::VarKey, crate::term::VarKey>,
        bwd: &mut std::collections::HashMap<crate::term::VarKey, crate::term::VarKey>,
    ) -> bool {
        match (s, t) {
            (Term::Var(a), Term::Var(b)) => {
                let f = fwd.entry(a.key.clone()).or_insert_with(|| b.key.clone());
                let g = bwd.entry(b.key.clone()).or_insert_with(|| a.key.clone());
                *f == b.key && *g == a.key
            }
            (Term::Const(a), Term::Const(b)) => a.name == b.name,
            (Term::Compound(a), Term::Compound(b)) => {
                a.functor == b.functor
                    && a.args.len() == b.args.len()
                    && a.args.iter().zip(&b.args).all(|(x, y)| go(x, y, fwd, bwd))
            }
            _ => false,
        }
    }
    go(s, t, &mut Default::default(), &mut Default::default())
}

/// A ground rule over atom indices: `head <- body`.
pub type IndexRule = (usize, Vec<usize>);

/// All subset-minimal models of a definite ground program over atoms
/// `0..n`, found by checking every subset. Exponential on purpose; callers
/// keep `n` small.
pub fn minimal_models_bruteforce(n: usize, rules: &[IndexRule]) -> Vec<BTreeSet<usize>> {
    assert!(n <= 20, "brute force enumeration is for small programs");
    let satisfied = |model: u32| -> bool {
        rules.iter().all(|(head, body)| {
            let body_true = body.iter().all(|b| model & (1 << b) != 0);
            !body_true || model & (1 << head) != 0
        })
    };
    let mut models: Vec<u32> = (0u32..1 << n).filter(|&m| satisfied(m)).collect();
    models.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u32> = Vec::new();
    'outer: for m in models {
        for &kept in &minimal {
            if kept & m == kept {
                continue 'outer;
            }
        }
        minimal.push(m);
    }
    minimal
        .into_iter()
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Term;

    #[test]
    fn closure_of_a_chain() {
        let m = reachability_closure(3, &[(0, 1), (1, 2)]);
        assert!(m[0][2] && m[0][0] && m[1][2]);
        assert!(!m[2][0]);
    }

    #[test]
    fn robinson_on_the_classic_example() {
        // f(X, g(Y)) = f(a, g(X)) => X=a, Y=a
        let t1 = Term::compound("f", vec![Term::var("X"), Term::compound("g", vec![Term::var("Y")])]);
        let t2 = Term::compound("f", vec![Term::constant("a"), Term::compound("g", vec![Term::var("X")])]);
        let s = robinson_unify(&t1, &t2).unwrap();
        assert_eq!(s.apply_term(&t1), s.apply_term(&t2));
        assert_eq!(s.apply_term(&Term::var("Y")), Term::constant("a"));
    }

    #[test]
    fn robinson_occurs_check() {
        let t1 = Term::var("X");
        let t2 = Term::compound("f", vec![Term::var("X")]);
        assert!(robinson_unify(&t1, &t2).is_none());
    }

    #[test]
    fn alpha_equivalence_requires_bijection() {
        let s = Term::compound("f", vec![Term::var("X"), Term::var("Y")]);
        let t = Term::compound("f", vec![Term::var("A"), Term::var("B")]);
        let u = Term::compound("f", vec![Term::var("A"), Term::var("A")]);
        assert!(alpha_equivalent(&s, &t));
        assert!(!alpha_equivalent(&s, &u));
        assert!(!alpha_equivalent(&u, &s));
    }

    #[test]
    fn least_model_of_definite_program() {
        // 0 <- . 1 <- 0. 2 <- 3. (3 has no rule)
        let rules = vec![(0, vec![]), (1, vec![0]), (2, vec![3])];
        let minimal = minimal_models_bruteforce(4, &rules);
        assert_eq!(minimal.len(), 1);
        assert_eq!(minimal[0], BTreeSet::from([0, 1]));
    }
}
