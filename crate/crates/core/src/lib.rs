//! A logic programming engine whose terms are typed by an ontology.
//!
//! Variables and constants carry class annotations drawn from an RDFS/OWL
//! taxonomy, and unification consults that taxonomy: a query over
//! `X:vin_Wine` matches facts about `vin_Red_Wine` because the ontology says
//! red wines are wines, and fails against `currency_Dollar` because nothing
//! says dollars are wines. Type checks replace what would otherwise be extra
//! body goals, pruning derivations at unification time.
//!
//! The pieces:
//!
//! * [`term`]: typed terms, literals, clauses, printing.
//! * [`sorts`]: type references and prefix tables.
//! * [`registry`]: the ontology snapshot (N-Triples in, closure out).
//! * [`unify`]: order-sorted unification with failure diagnostics.
//! * [`parser`]: the rule script language.
//! * [`solver`]: SLDNF resolution over typed clauses.
//! * [`wfs`]: ground well-founded models, the declarative reference.
//! * [`ruleml`]: a small typed RuleML dialect, import and export.
//! * [`reference`]: naive re-implementations used to cross-check the rest.

pub mod ntriples;
pub mod parser;
pub mod reference;
pub mod registry;
pub mod ruleml;
pub mod solver;
pub mod sorts;
pub mod subst;
pub mod term;
pub mod unify;
pub mod wfs;

pub use registry::{LoadReport, ReasonerLevel, RegistryError, TypeRegistry};
pub use sorts::{Prefixes, TypeRef};
pub use subst::Substitution;
pub use term::{Atom, Clause, Literal, Program, Sign, Term};
pub use unify::{UnifyError, Unifier};
