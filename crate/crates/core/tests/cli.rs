use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use safebb::report::{read_csv, ComparisonTable, RunReport, RunRow};

fn safebb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safebb")).args(args).output().expect("binary runs")
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.prob")).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_a_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = safebb(&["solve", &corpus("circle_linear"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("optimal with S3"));
    let r = RunReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.schema, 1);
    assert_eq!(r.problem, "circle_linear");
    assert!(!r.unsafe_run && r.proof_successes > 0);
    let f = -std::f64::consts::SQRT_2;
    assert!(r.lower <= f && f <= r.upper);
}

#[test]
fn budget_exhaustion_exits_two() {
    let o = safebb(&["solve", &corpus("product_constraint"), "--max-nodes", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("budget_exhausted"));
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.prob", "var x in [0, 1]; min y;");
    for args in [
        vec!["solve", bad.to_str().unwrap()],
        vec!["solve", "/no/such/file.prob"],
        vec!["solve", &corpus("circle_linear"), "--eps", "0"],
        vec!["solve", &corpus("circle_linear"), "--nb-starts", "0"],
        vec!["solve", &corpus("circle_linear"), "--strategy", "S9"],
        vec!["frobnicate"],
        vec!["compare", dir.path().join("missing").to_str().unwrap()],
    ] {
        let o = safebb(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?} printed no diagnostic");
    }
}

#[test]
fn infeasible_problem_exits_zero_with_infinite_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.prob", "var x in [-2, 2]; min x; subject x^2 + 1 = 0;");
    let out = dir.path().join("r.json");
    let o = safebb(&["solve", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains(r#""lower": "inf""#) && text.contains(r#""upper": "-inf""#), "{text}");
    let r = RunReport::from_json(&text).unwrap();
    assert_eq!(r.status.to_string(), "infeasible");
}

#[test]
fn s1_runs_are_flagged_unsafe() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = safebb(&["solve", &corpus("circle_linear"), "--strategy", "S1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("unsafe run"));
    let r = RunReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.unsafe_run);
    assert_eq!(r.proof_attempts, 0);
    assert_eq!(r.certified_upper, f64::INFINITY);
}

/// Row with the timing columns blanked out.
fn untimed(mut r: RunRow) -> RunRow {
    r.wall_time = 0.0;
    r.time_to_first_proof = r.time_to_first_proof.map(|_| 0.0);
    r
}

#[test]
fn compare_csv_and_json_agree_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["circle_linear", "disconnected", "sqr_branch"] {
        fs::copy(corpus(name), dir.path().join(format!("{name}.prob"))).unwrap();
    }
    write(dir.path(), "notes.txt", "not a problem");
    let d = dir.path().to_str().unwrap();
    let csv_a = safebb(&["compare", d]);
    assert_eq!(csv_a.status.code(), Some(0));
    let csv_b = safebb(&["compare", d]);
    let json = safebb(&["compare", d, "--format", "json"]);
    let a: Vec<RunRow> = read_csv(&csv_a.stdout[..]).unwrap();
    let b: Vec<RunRow> = read_csv(&csv_b.stdout[..]).unwrap();
    let j: ComparisonTable = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(a.len(), 15);
    assert_eq!(j.schema, 1);
    let names: Vec<_> = a.iter().map(|r| (r.problem.as_str(), r.strategy.as_str())).collect();
    assert_eq!(names[..5], [("circle_linear", "S1"), ("circle_linear", "S2"), ("circle_linear", "S3"), ("circle_linear", "S4"), ("circle_linear", "S5")]);
    let strip = |v: Vec<RunRow>| v.into_iter().map(untimed).collect::<Vec<_>>();
    let a = strip(a);
    assert_eq!(a, strip(b), "repeated runs differ");
    assert_eq!(a, strip(j.rows), "CSV and JSON differ");
}

#[test]
fn compare_writes_subsets_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(corpus("sqr_branch"), dir.path().join("sqr_branch.prob")).unwrap();
    let out = dir.path().join("table.csv");
    let o = safebb(&["compare", dir.path().to_str().unwrap(), "--strategies", "S3,S5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(rows.iter().map(|r| r.strategy.as_str()).collect::<Vec<_>>(), ["S3", "S5"]);
}

#[test]
fn replay_checks_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let prob = corpus("sphere_linear");
    assert_eq!(safebb(&["solve", &prob, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let o = safebb(&["replay", out.to_str().unwrap(), &prob]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("certificates replayed"));

    // move the stored existence-test box away from the zero
    let mut r = RunReport::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    let cert = &mut r.proven[0].certificate;
    for b in &mut cert.unknown_box {
        b[0] += 0.5;
        b[1] += 0.5;
    }
    for c in &mut cert.center {
        *c += 0.5;
    }
    let tampered = dir.path().join("t.json");
    fs::write(&tampered, r.to_json()).unwrap();
    let o = safebb(&["replay", tampered.to_str().unwrap(), &prob]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("certificate 0: existence test does not succeed"), "{}", stdout(&o));
}
