//! End-to-end runs of the binary: outputs, determinism and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn qdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdm"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn compare_pu_reports_the_tie() {
    let file = fixture("decision.qdm");
    let out = qdm(&[
        "compare",
        file.to_str().unwrap(),
        "both12",
        "sure2",
        "--criterion",
        "pu",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("<1, 0.1>"));
    assert!(text.trim_end().ends_with("Equal"));
}

#[test]
fn compare_rpu_discriminates() {
    let file = fixture("decision.qdm");
    let out = qdm(&[
        "compare",
        file.to_str().unwrap(),
        "both12",
        "sure2",
        "--criterion",
        "rpu",
        "--attitude",
        "pessimistic",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("<(1,1), (0.1,1)>"));
    assert!(text.contains("<1, (0.1,1)>"));
    assert!(text.trim_end().ends_with("Greater"));
}

#[test]
fn reduce_keeps_the_nested_trace() {
    let file = fixture("decision.qdm");
    let out = qdm(&[
        "reduce",
        file.to_str().unwrap(),
        "nested",
        "--under",
        "RR",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("[(1,(0.1,1))/x1, (0.1,0.5)/x5]"));
    let out = qdm(&["reduce", file.to_str().unwrap(), "nested", "--under", "R"]);
    assert!(stdout(&out).contains("[1/x1, 0.1/x5]"));
}

#[test]
fn eval_runs_the_file_queries() {
    let file = fixture("decision.qdm");
    let out = qdm(&["eval", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Equal"));
    assert!(text.contains("Greater"));
    assert!(text.contains("[(1,(0.1,1))/x1, (0.1,0.5)/x5]"));
}

#[test]
fn non_normalized_pu_input_exits_one() {
    let file = fixture("decision.qdm");
    let out = qdm(&[
        "eval",
        file.to_str().unwrap(),
        "weak",
        "--criterion",
        "pu",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not normalized"));
}

#[test]
fn parse_errors_exit_two_with_location() {
    let file = fixture("broken.qdm");
    std::fs::write(&file, "qdm 1\nscale 0 1\nlottery L = [1/a]\n").unwrap();
    let out = qdm(&["eval", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("3:"), "location missing in: {err}");
    std::fs::remove_file(&file).ok();
}

#[test]
fn audit_passes_on_a_small_space() {
    let out = qdm(&["audit", "--consequences", "2", "--levels", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("check b2"));
}

#[test]
fn audit_detects_the_collapsing_policy() {
    let out = qdm(&[
        "audit",
        "--consequences",
        "2",
        "--levels",
        "2",
        "--checks",
        "refinement",
        "--nabla-dedupe",
        "true",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("counterexample"));
}

#[test]
fn unknown_check_names_exit_two() {
    let out = qdm(&["audit", "--checks", "b9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oversized_audits_exit_one() {
    let out = qdm(&[
        "audit",
        "--consequences",
        "5",
        "--levels",
        "11",
        "--checks",
        "c1",
        "--budget",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn structured_output_is_byte_identical_across_runs() {
    let file = fixture("decision.qdm");
    let args = [
        "eval",
        file.to_str().unwrap(),
        "--format",
        "structured",
    ];
    let first = qdm(&args);
    let second = qdm(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout(&first).contains("\"verdict\""));

    let audit_args = [
        "audit",
        "--consequences",
        "2",
        "--levels",
        "3",
        "--format",
        "structured",
    ];
    let first = qdm(&audit_args);
    let second = qdm(&audit_args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn census_reports_the_class_ceiling() {
    let out = qdm(&["census", "--consequences", "2", "--levels", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("7 nonempty of at most 7"));
}
