use std::fs;
use std::path::PathBuf;

use lagcurv::cli_io::{parse_problem, read_fields, run_cli_with, FIELD_HEADER};
use lagcurv::Error;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli_with(args.iter().copied(), &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn golden_manufactured_spec_parses() {
    let spec = parse_problem(&data("manufactured_33.toml")).unwrap();
    assert_eq!(spec.domain.nx, 33);
    assert_eq!(spec.seed, 7);
}

#[test]
fn golden_out_of_range_spec_is_rejected() {
    let spec = parse_problem(&data("h_out_of_range.toml")).unwrap();
    let err = lagcurv::cli_io::resolve(&spec).unwrap_err();
    assert!(matches!(err, Error::Validation(_)), "{err}");
}

#[test]
fn solve_golden_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fields.csv");
    let report = dir.path().join("report.toml");
    let golden = data("manufactured_33.toml");
    let (code, stdout, stderr) = run(&[
        "lagcurv",
        "solve",
        golden.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("accepted = true"));
    assert_eq!(fs::read_to_string(&report).unwrap(), stdout);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(FIELD_HEADER));
    let rows = read_fields(&text).unwrap();
    assert_eq!(rows.len(), 31 * 31);
    assert!(rows.iter().all(|r| r.kappa1 >= r.kappa2));
}

#[test]
fn solve_17_has_225_rows() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fs::read_to_string(data("manufactured_33.toml"))
        .unwrap()
        .replace("= 33", "= 17");
    let path = dir.path().join("p17.toml");
    fs::write(&path, spec).unwrap();
    let out = dir.path().join("f.csv");
    let (code, _, stderr) = run(&[
        "lagcurv",
        "solve",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(
        read_fields(&fs::read_to_string(&out).unwrap())
            .unwrap()
            .len(),
        15 * 15
    );
}

#[test]
fn solve_out_of_range_exits_2() {
    let path = data("h_out_of_range.toml");
    let (code, _, stderr) = run(&["lagcurv", "solve", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("h"), "{stderr}");
}

#[test]
fn malformed_and_missing_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "version = [").unwrap();
    assert_eq!(run(&["lagcurv", "solve", bad.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["lagcurv", "solve", "/nonexistent/problem.toml"]).0, 2);
    assert_eq!(run(&["lagcurv", "frobnicate"]).0, 2);
}

#[test]
fn verify_cone_passes() {
    let (code, stdout, _) = run(&[
        "lagcurv",
        "verify-cone",
        "--n",
        "2",
        "--delta",
        "0.1",
        "--samples",
        "100000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("violations = [0, 0, 0, 0, 0]"));
}

#[test]
fn verify_cone_rejects_zero_delta() {
    assert_eq!(
        run(&[
            "lagcurv",
            "verify-cone",
            "--delta",
            "0",
            "--samples",
            "1000"
        ])
        .0,
        2
    );
}

#[test]
fn calibrate_and_linearization_commands() {
    let (code, stdout, _) = run(&[
        "lagcurv",
        "calibrate-A",
        "--n",
        "3",
        "--delta",
        "0.1",
        "--seed",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("a_param"));
    assert_eq!(run(&["lagcurv", "calibrate-A", "--samples", "10"]).0, 2);
    let (code, stdout, _) = run(&["lagcurv", "check-linearization", "--samples", "100"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("worst_fd_error"));
}

#[test]
fn convergence_study_exit_codes() {
    let (code, stdout, _) = run(&[
        "lagcurv",
        "convergence-study",
        "--grids",
        "9,17,33",
        "--profile",
        "exponential",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert_eq!(
        run(&["lagcurv", "convergence-study", "--grids", "9,17"]).0,
        2
    );
}

#[test]
fn compare_principle_passes_on_golden() {
    let golden = data("manufactured_33.toml");
    let (code, stdout, _) = run(&["lagcurv", "compare-principle", golden.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("upper_ok = true"));
}
