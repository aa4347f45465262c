//! Helpers shared by the CLI integration tests: locating the binary and the
//! example bundles, and running the binary with captured output.

#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

pub fn bin() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_sortedlp"))
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Bundles with a frozen expected.txt, as (directory, script) pairs.
pub const GOLDEN: &[(&str, &str)] = &[
    ("discount", "discount.lp"),
    ("empty-ontology", "plain.lp"),
    ("family", "family.lp"),
    ("function-sort", "cellar.lp"),
    ("graph-rdf", "graph.lp"),
    ("instance-guard", "shop.lp"),
    ("neg-explicit", "birds.lp"),
    ("sameas", "sameas.lp"),
    ("typed-merge", "merge.lp"),
    ("wfs-undefined", "cycle.lp"),
    ("win-move", "game.lp"),
    ("wine", "wine.lp"),
];

/// The function-free subset whose answers the ground oracle can confirm.
pub const FUNCTION_FREE: &[(&str, &str)] = &[
    ("discount", "discount.lp"),
    ("empty-ontology", "plain.lp"),
    ("family", "family.lp"),
    ("graph-rdf", "graph.lp"),
    ("instance-guard", "shop.lp"),
    ("neg-explicit", "birds.lp"),
    ("sameas", "sameas.lp"),
    ("typed-merge", "merge.lp"),
    ("win-move", "game.lp"),
    ("wine", "wine.lp"),
];

pub struct Run {
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
    pub code: i32,
}

impl Run {
    pub fn out(&self) -> &str {
        std::str::from_utf8(&self.stdout).expect("stdout is UTF-8")
    }

    pub fn err(&self) -> &str {
        std::str::from_utf8(&self.stderr).expect("stderr is UTF-8")
    }
}

pub fn run(args: &[&str]) -> Run {
    run_with_env(args, &[])
}

pub fn run_with_env(args: &[&str], envs: &[(&str, &Path)]) -> Run {
    let mut cmd = Command::new(bin());
    cmd.args(args).env_remove("SORTEDLP_PREFIX_FILE");
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("binary runs");
    Run {
        stdout: output.stdout,
        stderr: output.stderr,
        code: output.status.code().unwrap_or(-1),
    }
}

/// Runs the binary with `input` piped to stdin; a writer thread keeps the
/// pipes from deadlocking while the child produces output.
pub fn run_with_stdin(args: &[&str], input: Vec<u8>) -> Run {
    let mut child = Command::new(bin())
        .args(args)
        .env_remove("SORTEDLP_PREFIX_FILE")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    let mut stdin = child.stdin.take().expect("stdin piped");
    let writer = std::thread::spawn(move || {
        // The child may exit mid-write; a broken pipe is fine.
        let _ = stdin.write_all(&input);
    });
    let output = child.wait_with_output().expect("binary finishes");
    writer.join().expect("writer thread finishes");
    Run {
        stdout: output.stdout,
        stderr: output.stderr,
        code: output.status.code().unwrap_or(-1),
    }
}

pub fn run_bundle(bundle: &str, script: &str, extra: &[&str]) -> Run {
    let path = fixtures().join(bundle).join(script);
    let mut args: Vec<String> =
        vec!["--script".into(), path.to_str().expect("fixture path is UTF-8").into()];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

pub fn expected(bundle: &str) -> String {
    std::fs::read_to_string(fixtures().join(bundle).join("expected.txt")).expect("expected.txt")
}
