//! Runs the `charp-linearize` binary on job files.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_charp-linearize");

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("charp-cli-{}-{name}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn job(&self, name: &str, body: &str) -> PathBuf {
        let path = self.0.join(name);
        fs::write(&path, body).unwrap();
        path
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const QUADRATIC: &str = r#"{"p": 2, "lambda": "1+T", "f": {"2": "1"}}"#;

#[test]
fn analyze_succeeds() {
    let s = Scratch::new("analyze");
    let job = s.job("q.json", QUADRATIC);
    let out = run(&["analyze", "--job", job.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("k': 2\n") && text.contains("v_sigma: 1/1\n"), "{text}");
}

#[test]
fn output_is_reproducible() {
    let s = Scratch::new("repro");
    let job = s.job("f4.json", r#"{"p": 2, "r": 2, "lambda": "b+T", "f": {"4": "1", "6": "T"}}"#);
    let job = job.to_str().unwrap();
    for cmd in ["analyze", "solve", "disc"] {
        let a = run(&[cmd, "--job", job, "--degree", "40"]);
        let b = run(&[cmd, "--job", job, "--degree", "40"]);
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd} output differs between runs");
    }
}

#[test]
fn out_flag_writes_file() {
    let s = Scratch::new("out");
    let job = s.job("q.json", QUADRATIC);
    let target = s.0.join("report.txt");
    let out = run(&["disc", "--job", job.to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&target).unwrap();
    assert!(text.contains("level: EXACT-sigma\n"), "{text}");
}

#[test]
fn solve_and_divergence_csv() {
    let s = Scratch::new("csv");
    let job = s.job("cubic.json", r#"{"p": 2, "lambda": "1+T", "f": {"3": "1"}, "n_max": 5}"#);
    let job = job.to_str().unwrap();
    let out = run(&["solve", "--job", job, "--degree", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("k,v_num,v_den,zero_kind\n"));
    assert!(text.contains("\n9,-16,1,nonzero\n"), "{text}");
    let out = run(&["certify-divergence", "--job", job]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\n5,33,-96,1,-96,1,"));
}

#[test]
fn parse_errors_exit_2() {
    let s = Scratch::new("parse");
    let bad = s.job("bad.json", "{\n  \"p\": 2,\n  \"lambda\": \n}");
    let out = run(&["analyze", "--job", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4:1"));
    let unknown = s.job("unknown.json", r#"{"p": 2, "lambda": "1+T", "f": {"2": "1"}, "colour": 1}"#);
    assert_eq!(run(&["analyze", "--job", unknown.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["analyze"]).status.code(), Some(2));
    let good = s.job("q.json", QUADRATIC);
    let out = run(&["analyze", "--job", good.to_str().unwrap(), "--display-epsilon", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let out = run(&["analyze", "--job", "/nonexistent/job.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn math_errors_exit_3() {
    let s = Scratch::new("math");
    let root = s.job("root.json", r#"{"p": 2, "lambda": "1", "f": {"2": "1"}}"#);
    let out = run(&["analyze", "--job", root.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("root of unity"));
    let outside = s.job("outside.json", r#"{"p": 2, "lambda": "1+T", "f": {"3": "1"}}"#);
    assert_eq!(run(&["disc", "--job", outside.to_str().unwrap()]).status.code(), Some(3));
}
