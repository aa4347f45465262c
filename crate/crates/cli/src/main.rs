//! `sortedlp`: batch runner and REPL for logic programs whose terms carry
//! ontology types.
//!
//! Batch mode loads ontologies and scripts, runs each script's embedded
//! queries in order, and exits 0 on success, 1 on any error, 2 when an
//! answer set may be incomplete (floundering or the depth limit). `--repl`
//! drops into an interactive shell afterwards.

mod repl;
mod session;

use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

use sortedlp::solver::SolveLimits;

use session::{QueryReport, Session};

#[derive(Parser)]
#[command(name = "sortedlp", version, about = "Typed logic programs over RDFS/OWL taxonomies")]
struct Cli {
    /// Logic program to run; repeatable, loaded in order
    #[arg(long = "script", value_name = "PATH")]
    scripts: Vec<PathBuf>,

    /// N-Triples ontology to load before the scripts; repeatable
    #[arg(long = "ontology", value_name = "PATH")]
    ontologies: Vec<PathBuf>,

    /// Open the interactive shell after the batch phase
    #[arg(long)]
    repl: bool,

    /// Resolution depth bound; hitting it marks the answer set incomplete
    #[arg(long = "max-depth", value_name = "N", default_value_t = 10_000)]
    max_depth: usize,

    /// Stop each query after this many answers (default: all of them)
    #[arg(long = "max-answers", value_name = "N")]
    max_answers: Option<usize>,

    /// Cross-check function-free queries against the well-founded oracle
    #[arg(long)]
    oracle: bool,

    /// Print steps and registry queries after each query
    #[arg(long)]
    stats: bool,

    /// Make the oracle ground the whole program, not just goal-relevant rules
    #[arg(long = "exhaustive-grounding")]
    exhaustive_grounding: bool,
}

fn main() {
    let cli = Cli::parse();
    let limits = SolveLimits {
        max_depth: cli.max_depth.max(1),
        max_answers: cli.max_answers.unwrap_or(usize::MAX).max(1),
    };
    let mut session = Session::new(limits);
    session.stats = cli.stats;
    session.oracle = cli.oracle;
    session.exhaustive = cli.exhaustive_grounding;

    let mut report = QueryReport::default();
    let stdout = std::io::stdout();

    if let Err(err) = batch(&cli, &mut session, &mut report, &mut stdout.lock()) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }

    if cli.repl {
        repl::run(&mut session);
    }
    std::process::exit(report.exit_code());
}

/// Loads everything and runs each script's embedded queries as soon as the
/// script is in, so a later script's directives cannot rewrite an earlier
/// script's results. Load and parse problems abort; query-level problems
/// are folded into the exit code and the run continues.
fn batch(
    cli: &Cli,
    session: &mut Session,
    report: &mut QueryReport,
    out: &mut dyn Write,
) -> Result<(), session::SessionError> {
    if let Ok(prefix_file) = std::env::var("SORTEDLP_PREFIX_FILE") {
        let path = PathBuf::from(prefix_file);
        session.load_script_path(&path)?;
    }
    for path in &cli.ontologies {
        session.add_ontology_path(path)?;
    }
    let mut ran_any = false;
    for path in &cli.scripts {
        let queries = session.load_script_path(path)?;
        for query in &queries {
            ran_any = true;
            report.fold(session.run_query(query, out));
        }
    }
    // A bundle with no queries still validates: build the registry so bad
    // ontologies and annotation conflicts fail the run. Any query already
    // attempted the build and reported its own failure.
    if !ran_any {
        session.registry()?;
    }
    Ok(())
}
