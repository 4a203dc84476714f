use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lebesgue-lab"))
        .args(args)
        .current_dir(dir)
        .env_remove("LEBESGUE_LAB_OUT")
        .output()
        .unwrap()
}

fn error_of(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str::<serde_json::Value>(text.trim()).unwrap()["error"].clone()
}

#[test]
fn malformed_config_points_at_the_key() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"mesh": {"levels": 8, "stationz": 4}}"#).unwrap();
    let out = lab(&["solve", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = error_of(&out);
    assert_eq!(err["pointer"], "mesh.stationz");
    assert_eq!(err["kind"], "config");
    assert!(!dir.path().join("lebesgue-out").exists());
}

#[test]
fn invalid_levels_are_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"levels": {"a": 2.0, "b": 0.5}}"#).unwrap();
    let out = lab(&["mesh", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "input");
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"contour": {"levels": [1e-9]}}"#).unwrap();
    let out = lab(&["contour", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_of(&out)["kind"], "range");
}

#[test]
fn unknown_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["fly"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "usage");
    assert_eq!(lab(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn contour_residuals_are_tiny() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"contour": {"levels": [2.0], "stations": 200}}"#).unwrap();
    let out = lab(&["contour", "--config", "c.json", "--out", "o"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("o/contour.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,z,r,log_r,residual"));
    let worst = lines.map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lebesgue-lab"))
        .args(["potential-grid"])
        .current_dir(dir.path())
        .env("LEBESGUE_LAB_OUT", "from-env")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from-env/potential_grid.csv").exists());
    let head = std::fs::read_to_string(dir.path().join("from-env/potential_grid.csv")).unwrap();
    assert!(head.starts_with("r,z,V\n"));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "config.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"wos": {"points": [[0.5, 0.5], [0.4, 0.8]], "walks": 2000}, "seed": 42}"#,
    )
    .unwrap();
    for cmd in ["wos", "solve"] {
        let first = format!("first-{cmd}");
        assert!(lab(&[cmd, "--config", "c.json", "--out", &first], dir.path()).status.success());
        let echo = dir.path().join(&first).join("config.json");
        let second = format!("second-{cmd}");
        let out = lab(&[cmd, "--config", echo.to_str().unwrap(), "--out", &second], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let (a, b) = (artifacts(&dir.path().join(&first)), artifacts(&dir.path().join(&second)));
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd}");
    }
}

#[test]
fn same_seed_gives_same_walks() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"wos": {"walks": 2000}}"#).unwrap();
    for (out, seed) in [("a", "3"), ("b", "3"), ("c", "4")] {
        assert!(lab(&["wos", "--config", "c.json", "--seed", seed, "--out", out], dir.path()).status.success());
    }
    let read = |d: &str| std::fs::read_to_string(dir.path().join(d).join("wos.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn figures_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["reproduce-figures", "--out", "figs"], dir.path());
    assert!(out.status.success());
    for f in [
        "figure2_potential.csv",
        "figure2_potential.svg",
        "figure3_contours.csv",
        "figure3_contours.svg",
        "figure4_surfaces.csv",
        "figure4_surfaces.svg",
        "report.json",
        "config.json",
    ] {
        assert!(dir.path().join("figs").join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("figs/report.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
}

#[test]
fn probe_reports_a_limit_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["probe", "--out", "p"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p/report.json")).unwrap()).unwrap();
    assert_eq!(report["reports"]["limit_set"]["classification"], "strongly-irregular-like");
    let csv = std::fs::read_to_string(dir.path().join("p/probe.csv")).unwrap();
    assert!(csv.starts_with("path,station,r,z,value,stderr\n"));
}

#[test]
fn fem_probe_refuses_the_truncated_tip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"probe": {"source": "fem"}}"#).unwrap();
    let out = lab(&["probe", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["kind"], "domain");
}

#[test]
fn wiener_reads_a_contour_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.json"),
        r#"{"contour": {"levels": [2.0], "stations": 400, "grading": {"kind": "geometric-toward-z1", "ratio": 0.9}}}"#,
    )
    .unwrap();
    assert!(lab(&["contour", "--config", "c.json", "--out", "c"], dir.path()).status.success());
    std::fs::write(
        dir.path().join("w.json"),
        r#"{"wiener": {"contour_file": "c/contour.csv", "contour_level": 2.0, "q": [0.5], "j0": 4, "terms": 20}}"#,
    )
    .unwrap();
    let out = lab(&["wiener", "--config", "w.json", "--out", "w"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w/report.json")).unwrap()).unwrap();
    assert_eq!(report["reports"]["summary"]["profile"], "tabulated");
}
