use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatial-asp"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn solve_prints_one_atom_per_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("scene.lp"),
        "block(a). block(b). object(o1,small,black,circle,a).\n\
         query(Block) :- block(Block), not object(_,_,black,_,OtherBlock) : block(OtherBlock), OtherBlock != Block.\n",
    )
    .unwrap();
    let out = run(&["solve", "scene.lp"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l == "query(a)"), "{stdout}");
    assert!(!stdout.contains("query(b)"));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("unsafe.lp"), "p(X) :- not q(X).\n").unwrap();
    let out = run(&["check", "unsafe.lp"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsafe variable"));

    fs::write(dir.path().join("unsat.lp"), "a.\n:- a.\n").unwrap();
    let out = run(&["solve", "unsat.lp"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["replay", "stepgame", "--data", "."], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--transcript"));

    let out = run(&["solve"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_rebuilds_reports_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(run(
        &[
            "gen-stepgame",
            "--per-hop",
            "2",
            "--hops",
            "1-2",
            "--out",
            "data"
        ],
        p
    )
    .status
    .success());
    fs::write(
        p.join("mock.toml"),
        "[[rule]]\ncontains = \"\"\nresponse = \"left\"\n",
    )
    .unwrap();
    let out = run(
        &[
            "pipeline",
            "stepgame",
            "--strategy",
            "direct",
            "--backend",
            "mock",
            "--mock",
            "mock.toml",
            "--data",
            "data",
            "--hops",
            "1-2",
            "--per-hop",
            "2",
            "--out",
            "run",
        ],
        p,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&["eval", "run/traces.ndjson", "--out", "again"], p);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        fs::read_to_string(p.join("run/accuracy.csv")).unwrap(),
        fs::read_to_string(p.join("again/accuracy.csv")).unwrap()
    );
}
