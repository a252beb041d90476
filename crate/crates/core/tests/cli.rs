//! The binary end to end on the fixture files.

use std::path::PathBuf;
use std::process::Command;

use singuline::cli::report::{parse_box, AssumptionSummary, Report};
use singuline::topology::SingularityKind;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str], files: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_singuline"))
        .args(args)
        .args(files.iter().map(|f| fixture(f)))
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn discriminant_cusp_in_the_unit_box() {
    let (code, out, err) = run(&["--mode", "discriminant", "--box", "-1,1,-1,1", "--no-timing"], &["cusp.json"]);
    assert_eq!(code, 0, "{err}");
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.singularities.len(), 1);
    let s = &r.singularities[0];
    assert_eq!((s.kind, s.branches, s.loop_free), (SingularityKind::OrdinaryCusp, 2, true));
    assert!(r.timing.is_none());
    let (_, again, _) = run(&["--mode", "discriminant", "--box", "-1,1,-1,1", "--no-timing"], &["cusp.json"]);
    assert_eq!(out, again);
}

#[test]
fn resultant_node_globally() {
    let (code, out, err) = run(&["--mode", "resultant", "--global"], &["node_p.json", "node_q.json"]);
    assert_eq!(code, 0, "{err}");
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.singularities.len(), 1);
    assert_eq!((r.singularities[0].kind, r.singularities[0].branches), (SingularityKind::Node, 4));
    assert!(r.timing.is_some());
}

#[test]
fn assumption_check_stalls_on_the_shared_leading_zero() {
    let (code, out, _) = run(&["--check-assumptions", "--max-depth", "8", "--no-timing"], &["lead_p.json", "lead_q.json"]);
    assert_eq!(code, 2);
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.assumptions.status, AssumptionSummary::BudgetExhausted);
    assert!(!r.assumptions.charts[0].stalled.is_empty());
    for s in &r.assumptions.charts[0].stalled {
        assert!(parse_box(&s.bbox).unwrap().axes[0].contains_zero(), "{:?}", s.bbox);
    }
}

#[test]
fn input_errors_exit_with_one() {
    let (code, _, err) = run(&["--mode", "discriminant"], &["node_p.json", "node_q.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("cli.input_count"), "{err}");
    let (code, _, err) = run(&["--box", "1,0,0,1"], &["node_p.json", "node_q.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("cli.box"), "{err}");
}

#[test]
fn svg_output() {
    let dir = std::env::temp_dir().join(format!("singuline-svg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let svg = dir.join("cusp.svg");
    let report = dir.join("cusp.json");
    let (code, out, err) = run(
        &["--mode", "discriminant", "--svg", svg.to_str().unwrap(), "-o", report.to_str().unwrap()],
        &["cusp.json"],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.is_empty());
    let doc = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(doc.matches("class=\"singularity\"").count(), 1);
    assert!(doc.contains(">cusp/2<"));
    Report::parse(&std::fs::read_to_string(&report).unwrap()).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
}
