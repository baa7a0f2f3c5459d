use std::path::Path;
use std::process::{Command, Output};

use vcalc_cli::{export_json, run_lines, run_script, Kind, OutputMode, SessionState};
use vcalc_core::context::Context;

const EXAMPLES: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../../scripts/examples.vc"
);

fn vcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcalc"))
        .args(args)
        .output()
        .expect("vcalc runs")
}

fn script(body: &str) -> tempfile::NamedTempFile {
    let file = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(file.path(), body).unwrap();
    file
}

#[test]
fn examples_script_passes_every_check() {
    let out = vcalc(&["--script", EXAMPLES]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    let last = stdout.lines().last().unwrap();
    assert!(
        last.starts_with("all ") && last.ends_with(" checks passed"),
        "{last}"
    );
}

#[test]
fn empty_script_exits_cleanly_without_output() {
    let file = script("");
    let out = vcalc(&["--script", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn error_records_set_exit_code_one() {
    let file = script("# diverges\nreduce ∞\n");
    let out = vcalc(&["--script", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("not reducible: diverges to +∞"));
}

#[test]
fn missing_script_exits_with_two() {
    let out = vcalc(&["--script", "/nonexistent/never.vc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_lines_and_flags() {
    let out = vcalc(&[
        "--json",
        "--schedule",
        "4,2,10",
        "--tol",
        "1e-6",
        "--eval",
        "near sqrt(∂) 0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(json["payload"]["outcome"], "holds");
    assert_eq!(json["schedule"]["start"], 4);
    assert_eq!(json["schedule"]["stages"], 10);
    assert_eq!(
        vcalc(&["--schedule", "4,1,10", "--eval", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn json_output_is_deterministic() {
    let a = vcalc(&["--json", "--script", EXAMPLES]);
    let b = vcalc(&["--json", "--script", EXAMPLES]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    for line in String::from_utf8(a.stdout).unwrap().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn scripts_run_in_a_fresh_session() {
    let collect = || {
        let mut lines = Vec::new();
        let report = run_script(
            Path::new(EXAMPLES),
            Context::default(),
            OutputMode::Json,
            &mut |r, _| lines.push(export_json(r)),
        )
        .unwrap();
        (report, lines)
    };
    let first = collect();
    // a busy session elsewhere must not leak into the script
    let mut other = SessionState::default();
    run_lines(
        &mut other,
        ["let psi(ξ) = 0", ":config tol 1e-3", "let extra = ∞"],
        &mut |_, _| {},
    );
    let second = collect();
    assert_eq!(first, second);
    assert_eq!(first.0.errors, 0);
    let summary: vcalc_cli::OutputRecord = serde_json::from_str(first.1.last().unwrap()).unwrap();
    assert_eq!(summary.kind, Kind::Summary);
}
