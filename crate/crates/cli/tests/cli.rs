use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const HEADER: &str = "atom A : *\nconst a : A\nconst b : A\n";

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn olam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olam"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_prints_types() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "id.olam",
        &format!("{HEADER}id = \\x:A. x\nmain = id\n"),
    );
    let out = olam(&["check", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("main : A -> A"), "{}", stdout(&out));
}

#[test]
fn type_errors_carry_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.olam", &format!("{HEADER}main = a a\n"));
    let out = olam(&["check", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with(&format!("{}:4:", s(&p))), "{err}");
    assert!(err.contains("error:"), "{err}");

    let out = olam(&["check", s(&p), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["error"]["line"], 4);
}

#[test]
fn unknown_oracles_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "q.olam",
        &format!("{HEADER}import q\nmain = #q !\n"),
    );
    let out = olam(&["check", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("[unknown-oracle]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_files_are_usage_errors() {
    let out = olam(&["check", "/nonexistent/p.olam"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dist_and_trace_text() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.olam",
        &format!("{HEADER}main = choose[1/3]{{a}}{{b}} !\n"),
    );
    let out = olam(&["dist", s(&p)]);
    assert_eq!(stdout(&out), "a  1/3  w1\nb  2/3  w2\n");
    let out = olam(&["trace", s(&p)]);
    let text = stdout(&out);
    assert!(text.contains("w1: choose[1/3]{a}{b} ! ⊨^1/3 a"), "{text}");
    assert!(
        text.contains("[left]") && text.contains("[right]"),
        "{text}"
    );
}

#[test]
fn eval_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.olam",
        &format!("{HEADER}main = choose[1/2]{{a}}{{b}} !\n"),
    );
    let run = |seed: &str| {
        stdout(&olam(&[
            "eval",
            s(&p),
            "--samples",
            "200",
            "--seed",
            seed,
            "--format",
            "json",
        ]))
    };
    assert_eq!(run("5"), run("5"));
    let v: Value = serde_json::from_str(&run("5")).unwrap();
    let total: u64 = v["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 200);
}

#[test]
fn trust_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.olam",
        &format!("{HEADER}main = choose[1/3]{{a}}{{b}} !\n"),
    );
    let good = write(dir.path(), "good.dist", "a = 1/3\nb = 2/3\n");
    let bad = write(dir.path(), "bad.dist", "a = 1/2\nb = 1/2\n");

    let out = olam(&["trust", s(&p), "--target", s(&good), "--epsilon", "1/100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("verdict: trusted"));
    assert!(dir.path().join("c.olam.cert.json").exists());

    let out = olam(&["trust", s(&p), "--target", s(&bad), "--epsilon", "1/100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: untrusted"));

    for eps in ["0", "3/2", "x"] {
        let out = olam(&["trust", s(&p), "--target", s(&good), "--epsilon", eps]);
        assert_eq!(out.status.code(), Some(2), "epsilon {eps}");
    }
}

#[test]
fn unknown_target_outcomes_are_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.olam", &format!("{HEADER}main = a\n"));
    let t = write(dir.path(), "t.dist", "zz = 1\n");
    let out = olam(&["trust", s(&p), "--target", s(&t), "--epsilon", "1/10"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn oracle_freq_needs_an_oracle_form() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "c.olam", &format!("{HEADER}main = a\n"));
    let out = olam(&["oracle-freq", s(&p), "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let out = olam(&["oracle-freq", s(&p), "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_output_is_versioned_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "c.olam",
        &format!("{HEADER}main = choose[1/4]{{a}}{{b}} !\n"),
    );
    for cmd in ["check", "dist", "trace"] {
        let first = olam(&[cmd, s(&p), "--format", "json"]);
        let second = olam(&[cmd, s(&p), "--format", "json"]);
        assert_eq!(first.stdout, second.stdout, "{cmd}");
        let v: Value = serde_json::from_str(&stdout(&first)).unwrap();
        assert_eq!(v["schema"], 1, "{cmd}");
    }
}
