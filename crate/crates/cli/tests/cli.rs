use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use alcc::format::ProblemFile;
use alcc::problems::random_solvable_lp;
use alcc::trace::TraceFile;
use alcc::{solve, ScheduleConfig};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn alcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alcc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Solves `problem` writing both traces into `dir`; returns the process output.
fn solve_to(dir: &Path, problem: &Path, extra: &[&str]) -> (Output, PathBuf, PathBuf) {
    let csv = dir.join("trace.csv");
    let json = dir.join("trace.json");
    let mut args = vec![
        "solve",
        path_str(problem),
        "--trace",
        path_str(&csv),
        "--json",
        path_str(&json),
    ];
    args.extend_from_slice(extra);
    (alcc(&args), csv, json)
}

#[test]
fn trivial_zero_cone_converges_in_one_or_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv, _) = solve_to(dir.path(), &fixture("trivial.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# alcc-trace/1");
    assert_eq!(
        lines[1],
        "k,mu,alpha,eta,inner_iters,infeas,obj,y_norm,thm7_residual,thm6_residual,thm5_residual"
    );
    let rows = lines.len() - 2;
    assert!((1..=2).contains(&rows), "{rows} rows");
}

#[test]
fn two_variable_lp_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _, json) = solve_to(dir.path(), &fixture("two_var_lp.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let file = TraceFile::from_json(&std::fs::read_to_string(json).unwrap()).unwrap();
    let last = file.trace.last().unwrap();
    assert!((last.obj - 1.0).abs() <= 1e-5, "{}", last.obj);
    assert!(stdout(&out).contains("status: converged"));
}

#[test]
fn lmi_problem_file_solves() {
    let out = alcc(&["solve", path_str(&fixture("l1_lmi.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let obj: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("objective: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((obj - 0.8).abs() <= 1e-5, "{obj}");
}

#[test]
fn malformed_json_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 2,\n  \"cone\": {\"zero\": 2\n").unwrap();
    let out = alcc(&["solve", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line"), "{}", stderr(&out));
}

#[test]
fn dimension_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("two_var_lp.json"))
        .unwrap()
        .replace("\"b\": [1.0]", "\"b\": [1.0, 2.0]");
    std::fs::write(&bad, text).unwrap();
    let out = alcc(&["solve", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("`b`"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("trivial.json"))
        .unwrap()
        .replace("\"n\": 2", "\"n\": 2, \"extra\": 1");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(alcc(&["solve", path_str(&bad)]).status.code(), Some(1));
}

#[test]
fn outer_limit_and_numeric_failure_exit_codes() {
    let lp = fixture("two_var_lp.json");
    let out = alcc(&["solve", path_str(&lp), "--max-outer", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = alcc(&["solve", path_str(&lp), "--mu0", "1e308"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("numeric failure"));
}

#[test]
fn invalid_schedule_exits_one() {
    let out = alcc(&["solve", path_str(&fixture("two_var_lp.json")), "--beta", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn healthy_trace_passes_check_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let problem = fixture("two_var_lp.json");
    let (out, _, json) = solve_to(dir.path(), &problem, &["--no-early-stop", "--max-outer", "15"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let check = alcc(&["check-bounds", path_str(&json), path_str(&problem)]);
    let text = stdout(&check);
    assert_eq!(check.status.code(), Some(0), "{text}");
    assert_eq!(text.matches("infeasibility PASS").count(), 15);
    assert_eq!(text.matches("subopt-upper  PASS").count(), 15);
    assert_eq!(text.matches("subopt-lower  PASS").count(), 15);
    assert!(!text.contains("FAIL"));
}

#[test]
fn corrupted_infeasibility_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let problem = fixture("two_var_lp.json");
    let (_, _, json) = solve_to(dir.path(), &problem, &["--no-early-stop", "--max-outer", "6"]);
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let infeas = &mut doc["trace"]["iterates"][3]["infeas"];
    *infeas = serde_json::json!(infeas.as_f64().unwrap() + 0.5);
    std::fs::write(&json, serde_json::to_string(&doc).unwrap()).unwrap();

    let check = alcc(&["check-bounds", path_str(&json), path_str(&problem)]);
    let text = stdout(&check);
    assert_eq!(check.status.code(), Some(4), "{text}");
    assert!(text.contains("k=4   consistency   FAIL"), "{text}");
    assert!(text.contains("k=4   infeasibility FAIL"), "{text}");
}

#[test]
fn trace_from_another_problem_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, json) = solve_to(dir.path(), &fixture("trivial.json"), &[]);
    let check = alcc(&["check-bounds", path_str(&json), path_str(&fixture("two_var_lp.json"))]);
    assert_eq!(check.status.code(), Some(1));
    assert!(stderr(&check).contains("different problem"), "{}", stderr(&check));
}

#[test]
fn reformatting_the_problem_keeps_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let problem = fixture("two_var_lp.json");
    let (_, _, json) = solve_to(dir.path(), &problem, &[]);
    let compact = dir.path().join("compact.json");
    let parsed = ProblemFile::from_json(&std::fs::read_to_string(&problem).unwrap()).unwrap();
    std::fs::write(&compact, parsed.canonical_json()).unwrap();
    let check = alcc(&["check-bounds", path_str(&json), path_str(&compact)]);
    assert_eq!(check.status.code(), Some(0), "{}", stderr(&check));
}

#[test]
fn file_round_trip_reproduces_in_memory_trace() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..3 {
        let f = random_solvable_lp(4, 3, seed).unwrap();
        let path = dir.path().join(format!("lp{seed}.json"));
        std::fs::write(&path, ProblemFile::from(&f).to_json()).unwrap();
        let (out, _, json) = solve_to(dir.path(), &path, &["--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let from_file = TraceFile::from_json(&std::fs::read_to_string(json).unwrap()).unwrap();

        let schedule = ScheduleConfig {
            seed: 7,
            ..ScheduleConfig::default()
        };
        let in_memory = solve(&f.program().unwrap(), &schedule).unwrap();
        assert_eq!(from_file.schedule, schedule);
        assert_eq!(from_file.trace.iterates.len(), in_memory.iterates.len());
        for (a, b) in from_file.trace.iterates.iter().zip(&in_memory.iterates) {
            assert_eq!(a.inner_iters, b.inner_iters);
            assert!((a.obj - b.obj).abs() <= 1e-12);
            assert!((a.infeas - b.infeas).abs() <= 1e-12);
            for (u, v) in a.x.iter().zip(&b.x).chain(a.y_next.iter().zip(&b.y_next)) {
                assert!((u - v).abs() <= 1e-12);
            }
        }
    }
}
