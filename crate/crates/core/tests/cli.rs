use std::path::Path;
use std::process::{Command, Output};

fn nsfom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsfom")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bench_then_fit_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = nsfom(&[
        "bench", "--problem", "synthetic-df", "--n", "20", "--m", "50", "--methods", "nsfom-rm,sfom-rm", "--k", "200",
        "--reps", "3", "--seed", "7", "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("nsfom-rm"));
    for f in ["nsfom-rm.csv", "sfom-rm.csv", "summary.csv", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let fit = nsfom(&["fit-rate", path(&dir.path().join("nsfom-rm.csv")), "--min-calls", "10"]);
    assert!(fit.status.success(), "{}", String::from_utf8_lossy(&fit.stderr));
    assert!(String::from_utf8_lossy(&fit.stdout).starts_with("slope = "));
}

#[test]
fn alpha_out_of_range_exits_2() {
    let out = nsfom(&["bench", "--alpha", "2.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn unknown_flag_exits_2() {
    assert_eq!(nsfom(&["bench", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(nsfom(&["bench", "--problem", "lasso"]).status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_1() {
    let out = nsfom(&["bench", "--problem", "csv-rr", "--csv", "/nonexistent.csv", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = nsfom(&["bench", "--methods", "nsfom-xx"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn qq_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("s.csv");
    let mut text = String::from("v\n");
    for i in 0..20 {
        text.push_str(&format!("{}\n", i as f64 * 0.5));
    }
    std::fs::write(&input, text).unwrap();
    let out_file = dir.path().join("qq.csv");
    let out = nsfom(&["qq", path(&input), "--column", "v", "--out", path(&out_file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(out_file).unwrap().lines().count(), 21);
}

#[test]
fn csv_problem_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/houses.csv");
    let out = nsfom(&[
        "bench", "--problem", "csv-rr", "--csv", path(&data), "--target-col", "price", "--batch-size", "2",
        "--methods", "nsfom-pm,nsfom-em", "--alpha-unknown", "--p", "3", "--k", "30", "--reps", "2",
        "--sample-mode", "independent", "--out", path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"target_column\": 3"));
    assert!(manifest.contains("Independent"));
}
