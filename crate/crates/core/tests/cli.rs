//! End-to-end runs of the `subreg` binary: exit codes, report files and
//! curve output.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use subreg::cli::Report;

const EVAL_ERROR_DOC: &str = r#"
[mapping f]
kind = expr
expr = "sqrt(x1)"

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
map = f
"#;

const SYNTAX_ERROR_DOC: &str = r#"
[mapping f]
kind = expr
expr = "x1 +"

[task sms]
op = certify-sms
map = f
"#;

const UNMET_DOC: &str = r#"
[mapping F2]
kind = catalog
entry = F2

[anchor]
xbar = 0
ybar = 0

[task sms]
op = certify-sms
map = F2
"#;

fn subreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subreg"))
        .args(args)
        .env_remove("SUBREG_THREADS")
        .output()
        .expect("binary runs")
}

fn run_doc(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let path = dir.join("doc.txt");
    fs::write(&path, text).unwrap();
    let mut args = vec!["run", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    subreg(&args)
}

fn report(out: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&out.stdout)).expect("stdout holds a report")
}

#[test]
fn certified_example_exits_zero() {
    let out = subreg(&["reproduce", "ex-F1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.exit_code, 0);
    assert_eq!(r.example.as_deref(), Some("ex-F1"));
    assert!(r.task("sms").unwrap().success);
}

#[test]
fn expected_refutation_exits_zero() {
    let out = subreg(&["reproduce", "ex-F2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!report(&out).task("sms").unwrap().success);
}

#[test]
fn unmet_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_doc(dir.path(), UNMET_DOC, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!report(&out).task("sms").unwrap().expectation_met);
}

#[test]
fn malformed_documents_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_doc(dir.path(), SYNTAX_ERROR_DOC, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_inputs_exit_two() {
    assert_eq!(subreg(&["run", "/nonexistent/doc.txt"]).status.code(), Some(2));
    assert_eq!(subreg(&["reproduce", "ex-unknown"]).status.code(), Some(2));
    assert_eq!(subreg(&["verify", "no-such-theorem", "catalog"]).status.code(), Some(2));
}

#[test]
fn evaluation_errors_exit_three_unless_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_doc(dir.path(), EVAL_ERROR_DOC, &[]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert!(r.task("sms").unwrap().error.as_deref().unwrap().contains("sqrt"));

    let out = run_doc(dir.path(), EVAL_ERROR_DOC, &["--skip-eval-errors"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r.schedule.skip_eval_errors);
    assert!(r.task("sms").unwrap().error.is_none());
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = subreg(&["reproduce", "ex-eps-approx", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r = Report::from_json(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(r.task("approx").unwrap().success);
}

#[test]
fn curves_dir_receives_one_csv_per_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves");
    let out = subreg(&["reproduce", "ex-F2", "--curves-dir", curves.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(curves.join("sms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("shell,radius,min_ratio,max_ratio,cumulative_min"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn schedule_and_seed_overrides_reach_the_report() {
    let out = subreg(&["reproduce", "ex-subdiff-quadgrowth", "--schedule", "0.25,0.5,6,64", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let s = report(&out).schedule;
    assert_eq!((s.r0, s.decay, s.shells, s.points, s.seed), (0.25, 0.5, 6, 64, 9));
}

#[test]
fn repeated_runs_are_identical_up_to_timings() {
    let a = report(&subreg(&["reproduce", "ex-comp-cont"]));
    let b = report(&subreg(&["reproduce", "ex-comp-cont"]));
    assert_eq!(a.canonical_json(), b.canonical_json());
}

#[test]
fn thread_count_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_subreg"))
        .arg("list")
        .env("SUBREG_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_subreg"))
        .args(["reproduce", "ex-F1"])
        .env("SUBREG_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn list_names_every_example() {
    let out = subreg(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for id in subreg::cli::catalog::ids() {
        assert!(text.contains(&id), "{id} missing from list");
    }
}

#[test]
fn verify_catalog_reports_a_tally() {
    let out = subreg(&["verify", "composition", "catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], serde_json::json!(true));
    assert_eq!(v["violated"], serde_json::json!(0));
}
