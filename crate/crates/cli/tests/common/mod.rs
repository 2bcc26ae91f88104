//! Helpers for driving the `ldod` binary.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn ldod(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ldod")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("UTF-8 output"),
        stderr: String::from_utf8(out.stderr).expect("UTF-8 output"),
    }
}

/// Runs with `--json`, requires the given exit code and parses stdout.
pub fn ldod_json(args: &[&str], code: i32) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let r = ldod(&all);
    assert_eq!(r.code, code, "ldod {args:?}\nstdout: {}\nstderr: {}", r.stdout, r.stderr);
    serde_json::from_str(&r.stdout).expect("JSON report")
}

pub fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn run_spec(name: &str) -> String {
    format!("{}/runs/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// A fresh scratch directory under the target directory.
pub fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("scratch directory");
    dir
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}
