//! End-to-end checks of the command-line binary: output fixtures, byte-level
//! determinism, JSON shape, and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubemoments"))
        .args(args)
        .output()
        .expect("failed to launch the CLI binary")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn central_third_moment_fixture() {
    assert_eq!(
        stdout(&["central", "--r", "1", "--k", "3", "--format", "plain"]).trim(),
        "3*n^3*2^n/64"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["moment", "--rs", "1,1", "--format", "json"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stderr, second.stderr);
}

#[test]
fn thread_count_does_not_change_output() {
    let single = stdout(&["moment", "--rs", "1,1,1", "--threads", "1"]);
    let multi = stdout(&["moment", "--rs", "1,1,1", "--threads", "3"]);
    assert_eq!(single, multi);
}

#[test]
fn json_output_has_query_and_result() {
    let text = stdout(&["moment", "--rs", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v.get("query").is_some(), "missing query field: {text}");
    let result = v.get("result").expect("missing result field");
    assert!(result.get("terms").is_some(), "missing terms: {text}");
}

#[test]
fn verify_matches_both_oracles() {
    let by_subsets = stdout(&["verify", "--n", "3", "--rs", "1,1", "--oracle", "subsets"]);
    assert!(by_subsets.contains("MATCH"), "got: {by_subsets}");
    let by_tuples = stdout(&[
        "verify", "--n", "3", "--rs", "1", "--oracle", "tuples", "--p", "1/3",
    ]);
    assert!(by_tuples.contains("MATCH"), "got: {by_tuples}");
}

#[test]
fn usage_error_exits_with_2() {
    let out = run(&["moment", "--rs", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kernel_budget_abort_exits_with_3() {
    let out = run(&["moment", "--rs", "2,2,2", "--budget-kernels", "10"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn mc_is_reproducible_for_fixed_seed() {
    let args = [
        "mc", "--n", "4", "--r", "1", "--k", "2", "--samples", "1000", "--seed", "5",
    ];
    let first = stdout(&args);
    let second = stdout(&args);
    assert_eq!(first, second);
    assert!(!first.trim().is_empty());
}

#[test]
fn closed_forms_match_engine_through_cli() {
    for r in ["0", "1", "2"] {
        let closed = stdout(&["variance", "--r", r, "--closed-form"]);
        let engine = stdout(&["variance", "--r", r]);
        assert_eq!(closed, engine, "variance mismatch at r={r}");
        let closed = stdout(&["second-moment", "--r", r, "--closed-form"]);
        let engine = stdout(&["second-moment", "--r", r]);
        assert_eq!(closed, engine, "second moment mismatch at r={r}");
    }
}

#[test]
fn reporting_commands_run() {
    let limits = stdout(&["limits", "--r", "2", "--kmax", "4"]);
    assert!(!limits.trim().is_empty());
    let cumulants = stdout(&["cumulants", "--r", "1", "--kmax", "4"]);
    assert!(!cumulants.trim().is_empty());
    let depgraph = stdout(&["depgraph", "--n", "3", "--r", "1"]);
    assert!(depgraph.contains('4'), "expected degree 4 in: {depgraph}");
    let ratio = stdout(&["ratio", "--r", "0", "--m", "3", "--n-range", "1:4"]);
    assert_eq!(ratio.lines().count(), 4, "one line per n expected: {ratio}");
    let mean = stdout(&["mean", "--r", "1"]);
    assert_eq!(mean.trim(), "n*2^n/8");
}
