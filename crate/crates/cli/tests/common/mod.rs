#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_parcelsense");
pub const ECHO: &str = env!("CARGO_BIN_EXE_parcelsense-echo-worker");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PARCELSENSE_THREADS")
        .output()
        .expect("binary runs")
}

/// Runs and asserts success, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exited normally")
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
