use std::path::Path;

use tdacm::cli::{resolve_seed, run_with, EXIT_CONFIG, EXIT_OK};
use tdacm::report::parse_rows;

fn run(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut all = vec!["tdacm"];
    all.extend_from_slice(args);
    let code = run_with(all, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn seed_precedence() {
    assert_eq!(resolve_seed(Some(3), Some("5"), 9).unwrap(), 3);
    assert_eq!(resolve_seed(None, Some(" 5 "), 9).unwrap(), 5);
    assert_eq!(resolve_seed(None, None, 9).unwrap(), 9);
    assert!(resolve_seed(None, Some("x"), 9).is_err());
}

#[test]
fn emitted_scenario_runs_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&["scenario", "test2", "--emit", "--out", p(dir.path())]);
    assert_eq!(code, EXIT_OK);
    let file = dir.path().join("test2.json");
    assert!(out.contains("test2.json"));
    let mut csvs = Vec::new();
    for sub in ["a", "b"] {
        let out_dir = dir.path().join(sub);
        let (code, out, err) = run(&[
            "run",
            p(&file),
            "--out",
            p(&out_dir),
            "--dt",
            "0.002",
            "--seed",
            "4",
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.contains("seed 4"));
        csvs.push(std::fs::read(out_dir.join("test2.csv")).unwrap());
        let rows =
            parse_rows(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(String::from_utf8_lossy(&csvs[0]).lines().count(), 12501 + 1);
}

#[test]
fn compare_writes_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["scenario", "test3", "--emit", "--out", p(dir.path())]);
    assert_eq!(code, EXIT_OK);
    let file = std::fs::read_dir(dir.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let (code, out, err) = run(&["compare", p(&file), "--out", p(dir.path())]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("cismc"));
    let rows =
        parse_rows(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    let csvs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "csv")
        })
        .count();
    assert_eq!(csvs, 3);
}

#[test]
fn check_passes() {
    let (code, out, _) = run(&["check"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("10 checks"));
}

#[test]
fn printed_scenario_is_json() {
    let (code, out, _) = run(&["scenario", "test2"]);
    assert_eq!(code, EXIT_OK);
    assert!(tdacm::config::parse_scenario(&out, "stdout").is_ok());
}

#[test]
fn malformed_scenario_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, "{\n  \"schema_version\": 1,\n").unwrap();
    let (code, _, err) = run(&["run", p(&file), "--out", p(dir.path())]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("bad.json:3:"), "{err}");
    let (code, _, err) = run(&["run", p(&dir.path().join("missing.json"))]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("missing.json"));
}

#[test]
fn usage_errors_and_help() {
    let (code, _, err) = run(&["run", "x.json", "--bogus"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("Usage"), "{err}");
    let (code, _, err) = run(&["run", "x.json", "--controller", "lqr"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("lqr"));
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("compare"));
}
