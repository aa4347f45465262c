//! Shared state behind both the batch runner and the REPL: accumulated
//! prefixes, ontology sources, program clauses, and the lazily rebuilt
//! frozen registry they all query against.
//!
//! Every mutation (a new script, a new ontology, a sort declaration) drops
//! the built registry; the next query rebuilds it from all sources, runs the
//! annotation-conflict check over the whole program, and freezes. Rebuilding
//! keeps REPL `:ontology` loads simple at the cost of re-materializing the
//! closure, which is cheap at the taxonomy sizes this tool targets.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use sortedlp::parser::{parse_script, Directive, ParseError, Query};
use sortedlp::registry::{ReasonerLevel, RegistryError, TypeRegistry};
use sortedlp::solver::{SolveError, SolveLimits, SolveOutcome, Solver};
use sortedlp::sorts::{Prefixes, TypeRef};
use sortedlp::term::{Clause, Constant, PrettyExt, Program, Term};
use sortedlp::wfs::{bindings_key, Oracle, WfsError};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{path}: {err}")]
    Io { path: String, err: io::Error },
    #[error("{origin}: {err}")]
    Script { origin: String, err: ParseError },
    #[error("{path}: looks like RDF/XML, which is not supported; convert it to N-Triples and load the .nt file")]
    RdfXml { path: String },
    #[error("constant {name} is annotated with {annotated}, but the ontology asserts it into a class disjoint with it ({left} owl:disjointWith {right})")]
    AnnotationConflict { name: String, annotated: String, left: String, right: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

struct OntologySource {
    /// Name the `rdf/5` builtin matches against: the import URL or the
    /// path exactly as the user gave it.
    origin: String,
    /// Resolved filesystem path, registered as a second lookup alias.
    alias: Option<String>,
    text: String,
}

/// What a query run tells the exit-code logic.
#[derive(Clone, Copy, Debug, Default)]
pub struct QueryReport {
    pub floundered: bool,
    pub depth_limited: bool,
    pub errored: bool,
    pub oracle_disagreed: bool,
}

impl QueryReport {
    pub fn fold(&mut self, other: QueryReport) {
        self.floundered |= other.floundered;
        self.depth_limited |= other.depth_limited;
        self.errored |= other.errored;
        self.oracle_disagreed |= other.oracle_disagreed;
    }

    /// 0 clean, 2 incomplete (floundered or clipped), 1 any hard error.
    pub fn exit_code(&self) -> i32 {
        if self.errored || self.oracle_disagreed {
            1
        } else if self.floundered || self.depth_limited {
            2
        } else {
            0
        }
    }
}

pub struct Session {
    prefixes: Prefixes,
    sources: Vec<OntologySource>,
    reasoner: Option<String>,
    sort_decls: Vec<(String, Vec<TypeRef>, TypeRef)>,
    program: Program,
    registry: Option<TypeRegistry>,
    pub limits: SolveLimits,
    pub stats: bool,
    pub oracle: bool,
    pub exhaustive: bool,
}

impl Session {
    pub fn new(limits: SolveLimits) -> Self {
        Session {
            prefixes: Prefixes::common(),
            sources: Vec::new(),
            reasoner: None,
            sort_decls: Vec::new(),
            program: Program::default(),
            registry: None,
            limits,
            stats: false,
            oracle: false,
            exhaustive: false,
        }
    }

    pub fn prefixes(&self) -> &Prefixes {
        &self.prefixes
    }

    /// Reads and loads a script file. Embedded queries are returned, not
    /// run; the caller decides when (batch runs them immediately).
    pub fn load_script_path(&mut self, path: &Path) -> Result<Vec<Query>, SessionError> {
        let text = read(path)?;
        self.add_script(&text, &path.display().to_string(), path.parent())
    }

    /// Parses `text`, applies its directives in order, and appends its
    /// clauses to the program. Import targets resolve against `base`.
    pub fn add_script(
        &mut self,
        text: &str,
        origin: &str,
        base: Option<&Path>,
    ) -> Result<Vec<Query>, SessionError> {
        let parsed = parse_script(text, &mut self.prefixes)
            .map_err(|err| SessionError::Script { origin: origin.to_string(), err })?;
        for directive in &parsed.directives {
            match directive {
                // The parser already recorded the prefix.
                Directive::Prefix { .. } => {}
                Directive::Reasoner { mode } => {
                    ReasonerLevel::from_mode(mode)?;
                    self.reasoner = Some(mode.clone());
                }
                Directive::Import { url } => {
                    let resolved = resolve_import(url, base);
                    let text = read(&resolved)?;
                    self.add_source(url.clone(), Some(resolved), text)?;
                }
                Directive::SortDecl { functor, arg_types, result } => {
                    self.sort_decls.push((functor.clone(), arg_types.clone(), result.clone()));
                }
            }
        }
        self.program.clauses.extend(parsed.program.clauses);
        self.registry = None;
        Ok(parsed.queries)
    }

    pub fn add_ontology_path(&mut self, path: &Path) -> Result<(), SessionError> {
        let text = read(path)?;
        self.add_source(path.display().to_string(), None, text)
    }

    fn add_source(
        &mut self,
        origin: String,
        resolved: Option<PathBuf>,
        text: String,
    ) -> Result<(), SessionError> {
        let shown = resolved.as_ref().map(|p| p.display().to_string());
        if looks_like_rdf_xml(shown.as_deref().unwrap_or(&origin), &text) {
            return Err(SessionError::RdfXml { path: shown.unwrap_or(origin) });
        }
        let alias = shown.filter(|p| *p != origin);
        self.sources.push(OntologySource { origin, alias, text });
        self.registry = None;
        Ok(())
    }

    /// Builds (or returns) the frozen registry: loads every source, applies
    /// the reasoner level and function sorts, then rejects any program
    /// constant whose annotation contradicts the A-Box before freezing.
    pub fn registry(&mut self) -> Result<&TypeRegistry, SessionError> {
        if self.registry.is_none() {
            let mut reg = TypeRegistry::new();
            for src in &self.sources {
                reg.load_ontology(&src.origin, &src.text)?;
                if let Some(alias) = &src.alias {
                    reg.record_source_alias(alias);
                }
            }
            if let Some(mode) = &self.reasoner {
                reg.set_reasoner_mode(mode)?;
            }
            reg.set_prefixes(self.prefixes.clone());
            for (functor, args, result) in &self.sort_decls {
                reg.declare_function_sort(functor, args.clone(), result.clone())?;
            }
            self.check_annotations(&reg)?;
            reg.freeze();
            self.registry = Some(reg);
        }
        Ok(self.registry.as_ref().expect("just built"))
    }

    fn check_annotations(&self, reg: &TypeRegistry) -> Result<(), SessionError> {
        let mut offender = None;
        let mut visit = |t: &Term| {
            if offender.is_some() {
                return;
            }
            if let Term::Const(c) = t {
                if !c.ty.is_top() {
                    if let Some((left, right)) = reg.annotation_conflict(&c.name, &c.ty) {
                        offender = Some((c.clone(), left, right));
                    }
                }
            }
        };
        for clause in &self.program.clauses {
            for lit in clause.head.iter().chain(&clause.body) {
                for arg in &lit.atom.args {
                    walk(arg, &mut visit);
                }
            }
        }
        match offender {
            None => Ok(()),
            Some((c, left, right)) => Err(SessionError::AnnotationConflict {
                name: bare_constant(&c).pretty(&self.prefixes).to_string(),
                annotated: c.ty.pretty(&self.prefixes).to_string(),
                left: left.pretty(&self.prefixes).to_string(),
                right: right.pretty(&self.prefixes).to_string(),
            }),
        }
    }

    /// Runs one query, printing the goal, its answers, and optional stats
    /// to `out`; problems go to stderr. Never returns Err: failures are
    /// folded into the report so a batch can keep going and a REPL never
    /// dies.
    pub fn run_query(&mut self, query: &Query, out: &mut dyn Write) -> QueryReport {
        let mut report = QueryReport::default();
        let _ = writeln!(out, "?- {}.", goal_text(&query.goal, &self.prefixes));
        if let Err(err) = self.registry() {
            eprintln!("error: {err}");
            report.errored = true;
            return report;
        }
        let limits = SolveLimits {
            max_depth: self.limits.max_depth,
            max_answers: if query.all_answers { self.limits.max_answers } else { 1 },
        };
        let registry = self.registry.as_ref().expect("built above");
        let program = &self.program;
        let goal = &query.goal;

        // Deep derivations recurse roughly once per step, which outgrows
        // the default stack well before the default depth limit; solve on
        // a dedicated worker with room to spare.
        let solved = run_on_big_stack(|| {
            Solver::with_limits(program, registry, limits).solve(goal)
        });

        let outcome = match solved {
            Err(panic_msg) => {
                eprintln!("error: internal failure while solving: {panic_msg}");
                report.errored = true;
                return report;
            }
            Ok(Err(SolveError::Floundering(what))) => {
                eprintln!("error: floundering, {what} was selected with unbound variables");
                report.floundered = true;
                return report;
            }
            Ok(Err(err)) => {
                eprintln!("error: {err}");
                report.errored = true;
                return report;
            }
            Ok(Ok(outcome)) => outcome,
        };

        self.print_answers(goal, &outcome, out);
        if outcome.depth_limited {
            eprintln!("warning: depth limit {} hit, the answer set may be incomplete", limits.max_depth);
            report.depth_limited = true;
        }
        if self.stats {
            let _ = writeln!(
                out,
                "% steps={} registry_queries={}",
                outcome.stats.steps, outcome.stats.registry_queries
            );
        }
        if self.oracle {
            self.oracle_check(query, &outcome, limits, &mut report, out);
        }
        report
    }

    fn print_answers(&self, goal: &Clause, outcome: &SolveOutcome, out: &mut dyn Write) {
        if outcome.answers.is_empty() {
            let _ = writeln!(out, "no");
            return;
        }
        if goal.variables().is_empty() {
            let _ = writeln!(out, "true");
            return;
        }
        for answer in &outcome.answers {
            let mut line = String::new();
            for (i, b) in answer.bindings.iter().enumerate() {
                if i > 0 {
                    line.push_str(", ");
                }
                let shown = bare_term(&b.term);
                let _ = write!(line, "{} = {}", b.var.name, shown.pretty(&self.prefixes));
                if !b.ty.is_top() {
                    let _ = write!(line, " : {}", b.ty.pretty(&self.prefixes));
                }
            }
            let _ = writeln!(out, "{line}");
        }
    }

    /// Cross-checks a completed solve against the well-founded oracle and
    /// reports any disagreement loudly. Truncated answer sets cannot be
    /// compared, and programs with function symbols are out of the
    /// oracle's reach; both cases are announced as skips.
    fn oracle_check(
        &self,
        query: &Query,
        outcome: &SolveOutcome,
        limits: SolveLimits,
        report: &mut QueryReport,
        out: &mut dyn Write,
    ) {
        if outcome.depth_limited
            || !query.all_answers
            || outcome.answers.len() >= limits.max_answers
        {
            let _ = writeln!(out, "% oracle: skipped (answer set may be truncated)");
            return;
        }
        let registry = self.registry.as_ref().expect("built by run_query");
        let mut solver_keys = std::collections::BTreeSet::new();
        for answer in &outcome.answers {
            let mut pairs = Vec::with_capacity(answer.bindings.len());
            for b in &answer.bindings {
                match &b.term {
                    Term::Const(c) => pairs.push((&b.var, &*c.name)),
                    _ => {
                        let _ = writeln!(out, "% oracle: skipped (non-constant answer)");
                        return;
                    }
                }
            }
            solver_keys.insert(bindings_key(registry, pairs));
        }

        let oracle = Oracle::new(registry).exhaustive(self.exhaustive);
        let program = &self.program;
        let goal = &query.goal;
        let answers = match run_on_big_stack(|| oracle.goal_answers(program, goal)) {
            Err(panic_msg) => {
                eprintln!("error: internal failure in the oracle: {panic_msg}");
                report.errored = true;
                return;
            }
            Ok(Err(WfsError::NotDatalog(what))) => {
                let _ = writeln!(out, "% oracle: skipped ({what})");
                return;
            }
            Ok(Err(err)) => {
                eprintln!("error: oracle failed: {err}");
                report.errored = true;
                return;
            }
            Ok(Ok(answers)) => answers,
        };

        if solver_keys == answers.true_keys {
            let _ = writeln!(
                out,
                "% oracle: agreement ({} true, {} undefined unreported)",
                answers.true_keys.len(),
                answers.undefined_keys.len()
            );
        } else {
            report.oracle_disagreed = true;
            eprintln!("!! ORACLE DISAGREEMENT on ?- {}.", goal_text(&query.goal, &self.prefixes));
            eprintln!("!!   solver: {}", key_set(&solver_keys));
            eprintln!("!!   oracle: {}", key_set(&answers.true_keys));
            if !answers.undefined_keys.is_empty() {
                eprintln!("!!   oracle undefined: {}", key_set(&answers.undefined_keys));
            }
        }
    }
}

fn read(path: &Path) -> Result<String, SessionError> {
    std::fs::read_to_string(path)
        .map_err(|err| SessionError::Io { path: path.display().to_string(), err })
}

fn walk(t: &Term, visit: &mut impl FnMut(&Term)) {
    visit(t);
    if let Term::Compound(c) = t {
        for arg in &c.args {
            walk(arg, visit);
        }
    }
}

fn bare_constant(c: &Constant) -> Term {
    Term::Const(Constant { name: c.name.clone(), ty: TypeRef::top() })
}

/// The term as the answer line shows it: a constant sheds its annotation
/// because the narrowed type is printed separately.
fn bare_term(t: &Term) -> Term {
    match t {
        Term::Const(c) => bare_constant(c),
        other => other.clone(),
    }
}

fn goal_text(goal: &Clause, prefixes: &Prefixes) -> String {
    let mut text = String::new();
    for (i, lit) in goal.body.iter().enumerate() {
        if i > 0 {
            text.push_str(", ");
        }
        let _ = write!(text, "{}", lit.pretty(prefixes));
    }
    text
}

fn key_set(keys: &std::collections::BTreeSet<String>) -> String {
    let mut text = String::from("{");
    for (i, key) in keys.iter().enumerate() {
        if i > 0 {
            text.push_str("; ");
        }
        text.push_str(if key.is_empty() { "true" } else { key });
    }
    text.push('}');
    text
}

/// Runs `f` on a thread with a 64 MiB stack, converting a panic into an
/// error message instead of tearing the process down.
fn run_on_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, String> {
    std::thread::scope(|scope| {
        let handle = std::thread::Builder::new()
            .stack_size(64 << 20)
            .spawn_scoped(scope, f)
            .expect("spawn worker");
        handle.join().map_err(|payload| {
            payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string())
        })
    })
}

/// Maps an `import` target to a local file: URLs keep only their basename,
/// relative paths hang off the importing script's directory.
fn resolve_import(url: &str, base: Option<&Path>) -> PathBuf {
    let candidate = match url.split_once("://") {
        Some((_, rest)) => PathBuf::from(rest.rsplit('/').next().unwrap_or(rest)),
        None => PathBuf::from(url),
    };
    match base {
        Some(dir) if candidate.is_relative() => dir.join(candidate),
        _ => candidate,
    }
}

fn looks_like_rdf_xml(path: &str, text: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    if [".owl", ".rdf", ".xml"].iter().any(|ext| lower.ends_with(ext)) {
        return true;
    }
    let head = text.trim_start();
    head.starts_with("<?xml") || head.starts_with("<rdf:RDF") || head.starts_with("<RDF")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imports_resolve_against_the_script_directory() {
        let base = Path::new("/work/scripts");
        assert_eq!(
            resolve_import("http://example.org/vocab/vin.nt", Some(base)),
            PathBuf::from("/work/scripts/vin.nt")
        );
        assert_eq!(resolve_import("data/vin.nt", Some(base)), PathBuf::from("/work/scripts/data/vin.nt"));
        assert_eq!(resolve_import("/abs/vin.nt", Some(base)), PathBuf::from("/abs/vin.nt"));
        assert_eq!(resolve_import("vin.nt", None), PathBuf::from("vin.nt"));
    }

    #[test]
    fn rdf_xml_is_detected_by_extension_or_prologue() {
        assert!(looks_like_rdf_xml("wine.owl", ""));
        assert!(looks_like_rdf_xml("wine.RDF", ""));
        assert!(looks_like_rdf_xml("wine.xml", ""));
        assert!(looks_like_rdf_xml("wine.nt", "<?xml version=\"1.0\"?>"));
        assert!(looks_like_rdf_xml("wine.nt", "  <rdf:RDF xmlns=\"x\">"));
        // N-Triples subjects start with '<' too; that alone must not trip it.
        assert!(!looks_like_rdf_xml("wine.nt", "<http://a> <http://b> <http://c> ."));
    }

    #[test]
    fn script_errors_carry_their_origin() {
        let mut session = Session::new(SolveLimits::default());
        let err = session.add_script("p(", "broken.lp", None).unwrap_err();
        assert!(matches!(err, SessionError::Script { .. }));
        assert!(err.to_string().starts_with("broken.lp: "));
    }

    #[test]
    fn annotation_conflicts_are_rejected_at_build_time() {
        let nt = "\
<http://example.org/v#Red> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://example.org/v#Wine> .\n\
<http://example.org/v#White> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://example.org/v#Wine> .\n\
<http://example.org/v#Red> <http://www.w3.org/2002/07/owl#disjointWith> <http://example.org/v#White> .\n\
<http://example.org/v#Noir> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://example.org/v#Red> .\n";
        let dir = std::env::temp_dir().join("sortedlp-session-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("conflict.nt");
        std::fs::write(&path, nt).unwrap();

        let mut session = Session::new(SolveLimits::default());
        session.add_ontology_path(&path).unwrap();
        session
            .add_script(
                ":- prefix(v, \"http://example.org/v#\").\np(v_White:v_Noir).",
                "inline",
                None,
            )
            .unwrap();
        let err = match session.registry() {
            Ok(_) => panic!("conflicting annotation must not build"),
            Err(err) => err,
        };
        assert!(matches!(err, SessionError::AnnotationConflict { .. }), "got {err}");

        // The same constant under its asserted class is fine.
        let mut ok = Session::new(SolveLimits::default());
        ok.add_ontology_path(&path).unwrap();
        ok.add_script(
            ":- prefix(v, \"http://example.org/v#\").\np(v_Red:v_Noir).",
            "inline",
            None,
        )
        .unwrap();
        assert!(ok.registry().is_ok());
    }

    #[test]
    fn query_output_prints_bindings_true_and_no() {
        let mut session = Session::new(SolveLimits { max_depth: 100, max_answers: usize::MAX });
        let queries = session
            .add_script("p(a).\np(b).\n:- solve(p(X)).\n:- solve(p(a)).\n:- solve(p(c)).\n", "inline", None)
            .unwrap();
        let mut out = Vec::new();
        let mut report = QueryReport::default();
        for q in &queries {
            report.fold(session.run_query(q, &mut out));
        }
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "?- p(X).\nX = a\nX = b\n?- p(a).\ntrue\n?- p(c).\nno\n",
        );
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn floundering_and_depth_limits_map_to_exit_code_two() {
        let mut session = Session::new(SolveLimits { max_depth: 100, max_answers: usize::MAX });
        let queries = session
            .add_script("q(a).\n:- solve(not(q(X))).\n", "inline", None)
            .unwrap();
        let mut out = Vec::new();
        let report = session.run_query(&queries[0], &mut out);
        assert!(report.floundered);
        assert_eq!(report.exit_code(), 2);

        // The argument grows every call, so the loop table never fires and
        // the depth limit is what stops the descent.
        let mut deep = Session::new(SolveLimits { max_depth: 16, max_answers: usize::MAX });
        let queries = deep.add_script("r(a).\nr(X) :- r(f(X)).\n:- solve(r(Y)).\n", "inline", None).unwrap();
        let mut out = Vec::new();
        let report = deep.run_query(&queries[0], &mut out);
        assert!(report.depth_limited);
        assert_eq!(report.exit_code(), 2);
    }

    #[test]
    fn oracle_agreement_is_reported_inline() {
        let mut session = Session::new(SolveLimits { max_depth: 100, max_answers: usize::MAX });
        session.oracle = true;
        let queries = session
            .add_script("win(X) :- move(X, Y), not(win(Y)).\nmove(a, b).\n:- solve(win(X)).\n", "inline", None)
            .unwrap();
        let mut out = Vec::new();
        let report = session.run_query(&queries[0], &mut out);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("X = a\n"), "got {text}");
        assert!(text.contains("% oracle: agreement (1 true, 0 undefined unreported)"), "got {text}");
        assert!(!report.oracle_disagreed);
        assert_eq!(report.exit_code(), 0);
    }
}
