//! Interactive query shell. Goals end with a period and may span lines;
//! lines starting with `:` are commands. Nothing a user types may kill the
//! process: every failure prints an error and the loop continues.

use std::io::{self, BufRead, Write};
use std::path::Path;

use sortedlp::parser::{parse_goal, Query};

use crate::session::Session;

enum Flow {
    Continue,
    Quit,
}

pub fn run(session: &mut Session) {
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    let mut line = String::new();
    let mut pending = String::new();
    loop {
        let prompt = if pending.is_empty() { "?- " } else { "|  " };
        let _ = write!(stdout, "{prompt}");
        let _ = stdout.flush();

        line.clear();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            // Invalid UTF-8 up to the newline is consumed and discarded.
            Err(err) => {
                eprintln!("error: {err}");
                pending.clear();
                continue;
            }
        }

        let trimmed = line.trim();
        if pending.is_empty() {
            if trimmed.is_empty() {
                continue;
            }
            if let Some(command) = trimmed.strip_prefix(':') {
                match handle_command(session, command, &mut stdout) {
                    Flow::Continue => continue,
                    Flow::Quit => break,
                }
            }
        }

        pending.push_str(&line);
        if !pending.trim_end().ends_with('.') {
            continue;
        }
        let text = std::mem::take(&mut pending);
        match parse_goal(text.trim(), session.prefixes()) {
            Ok(goal) => {
                let query = Query { goal, all_answers: true };
                session.run_query(&query, &mut stdout);
            }
            Err(err) => eprintln!("error: {err}"),
        }
    }
}

fn handle_command(session: &mut Session, command: &str, out: &mut dyn Write) -> Flow {
    let (name, arg) = match command.split_once(char::is_whitespace) {
        Some((name, rest)) => (name, rest.trim()),
        None => (command, ""),
    };
    match name {
        "quit" => return Flow::Quit,
        "load" if arg.is_empty() => eprintln!("error: usage, :load <script.lp>"),
        "load" => match session.load_script_path(Path::new(arg)) {
            Ok(queries) => {
                let _ = writeln!(out, "% loaded {arg}");
                for query in &queries {
                    session.run_query(query, out);
                }
            }
            Err(err) => eprintln!("error: {err}"),
        },
        "ontology" if arg.is_empty() => eprintln!("error: usage, :ontology <file.nt>"),
        "ontology" => {
            // Force the rebuild now so load problems surface here, not at
            // the next query.
            let loaded = session
                .add_ontology_path(Path::new(arg))
                .and_then(|()| session.registry().map(|_| ()));
            match loaded {
                Ok(()) => {
                    let _ = writeln!(out, "% ontology loaded: {arg}");
                }
                Err(err) => eprintln!("error: {err}"),
            }
        }
        "stats" => {
            session.stats = !session.stats;
            let _ = writeln!(out, "% stats {}", if session.stats { "on" } else { "off" });
        }
        "oracle" => match arg {
            "on" => {
                session.oracle = true;
                let _ = writeln!(out, "% oracle on");
            }
            "off" => {
                session.oracle = false;
                let _ = writeln!(out, "% oracle off");
            }
            _ => eprintln!("error: usage, :oracle on|off"),
        },
        other => eprintln!("error: unknown command :{other}"),
    }
    Flow::Continue
}
