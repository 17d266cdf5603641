use std::fs;
use std::process::{Command, Output};

use phwc_cli::report::summarize;
use phwc_cli::{emit_report, read_report, Format};

fn phwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phwc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_manifest(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("m.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const DISK: &str = r#"{
    "name": "disk",
    "domain": {"dim": 2, "metric": {"conformal": "0.1*x1*x2"}},
    "target": {"cdim": 2, "hermitian": "fubini_study", "kaehler": true},
    "map": {"components": ["x1 + i*x2", "(x1 + i*x2)^2"]},
    "checks": ["phwc", "isotropy", "commutator", "tension", "fstructure", "nijenhuis", "parallel"],
    "sample": {"count": 7, "seed": 5, "box": [[-0.5, 0.5], [-0.5, 0.5]]}
}"#;

#[test]
fn check_reports_round_trip_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(&dir, DISK);
    let a = phwc(&["check", &m]);
    let b = phwc(&["check", &m]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);

    let report = read_report(&a.stdout).unwrap();
    assert_eq!(report.records.len(), 7 * 7);
    assert_eq!(report.summaries, summarize(&report.records));
    assert_eq!(emit_report(&report, Format::Json), a.stdout);

    let saved = dir.path().join("r.json");
    fs::write(&saved, &a.stdout).unwrap();
    let again = phwc(&["report", saved.to_str().unwrap(), "--format", "json"]);
    assert_eq!(again.stdout, a.stdout);
}

#[test]
fn seed_and_points_flags() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(&dir, DISK);
    let base = read_report(&phwc(&["check", &m]).stdout).unwrap();
    let other = read_report(&phwc(&["check", &m, "--seed", "6", "--points", "3"]).stdout).unwrap();
    assert_eq!(other.provenance.seed, 6);
    assert_eq!(other.records.len(), 3 * 7);
    assert_ne!(other.records[0].point, base.records[0].point);
}

#[test]
fn table_has_one_row_per_point_and_check() {
    let out = phwc(&["check", "example1", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = text
        .lines()
        .filter(|l| l.trim_end().ends_with("ok"))
        .count();
    assert_eq!(rows, 100 * 3);
}

#[test]
fn failures_exit_with_one() {
    let out = phwc(&["check", "example2", "--tol", "hwc=100", "--points", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_report(&out.stdout).unwrap();
    assert_eq!(report.failures(), 4);
}

#[test]
fn malformed_expression_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(&dir, &DISK.replace("(x1 + i*x2)^2", "x1 + * 2"));
    let out = phwc(&["check", &m]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("map.components[1]: parse error at column 6"),
        "{err}"
    );
}

#[test]
fn dimension_mismatch_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(&dir, &DISK.replace("\"cdim\": 2", "\"cdim\": 3"));
    let out = phwc(&["check", &m]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("map.components"));
}

#[test]
fn flow_writes_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_manifest(
        &dir,
        r#"{
            "domain": {"dim": 2},
            "target": {"cdim": 1},
            "map": {"components": ["1 + 0.3*cos(x1) + 0.1*i*sin(2*x2)"]},
            "sample": {"count": 5, "seed": 2},
            "flow": {"dims": [16, 16], "dt": 0.02, "max_steps": 5000, "stop_tol": 1e-7}
        }"#,
    );
    let snap = dir.path().join("u.txt");
    let out = phwc(&["flow", &m, "--snapshot", snap.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let grid = phwc::flow::read_snapshot(fs::read(&snap).unwrap().as_slice()).unwrap();
    assert_eq!(grid.nodes(), 256);
    // the limit is the mean value 1
    for node in 0..grid.nodes() {
        assert!((grid.at(node)[0] - phwc::Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }
}
