//! End-to-end runs of the installed binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_prereq-refiner")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("PREREQ_S1")
        .env_remove("PREREQ_OUT")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn refine_reference_fixture_writes_expected_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "refine",
        "--hierarchy",
        fixture("reference/hierarchy.json").to_str().unwrap(),
        "--grades",
        fixture("reference/grades.csv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let decisions = std::fs::read_to_string(dir.path().join("decisions.csv")).unwrap();
    let expected = "\
edge,verdict,relevance,avg_cpr,avg_rpr,effective_n
A→B,KEPT,0.72,0.72,0.18,10
A→C,DELETED,,0.04,0.00,10
B→F,KEPT,0.74,0.74,0.12,10
C→D,KEPT,0.52,0.52,0.40,10
C→E,REVERSED,0.72,0.06,0.72,10
D→E,REVERSED,0.60,0.34,0.60,10
E→G,KEPT,0.66,0.66,0.04,10
D→G,KEPT,0.56,0.56,0.36,10
D→F,REVERSED,0.64,0.06,0.64,10
";
    assert_eq!(decisions, expected);

    for name in [
        "report.json",
        "final.dot",
        "delta.csv",
        "fuzzy_cpr.csv",
        "fuzzy_rpr.csv",
        "averages.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }

    // the serialized report parses back and re-renders byte for byte
    let raw = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let parsed = prereq_refiner::report::PipelineReport::from_json_str(&raw).unwrap();
    assert_eq!(parsed.to_json_string().unwrap(), raw);
}

#[test]
fn refine_rejects_grades_missing_a_hierarchy_skill() {
    let dir = tempfile::tempdir().unwrap();
    // drop the G column from the reference grades
    let full = std::fs::read_to_string(fixture("reference/grades.csv")).unwrap();
    let trimmed: String = full
        .lines()
        .map(|line| {
            let cut = line.rfind(',').unwrap();
            format!("{}\n", &line[..cut])
        })
        .collect();
    let grades = dir.path().join("grades.csv");
    std::fs::write(&grades, trimmed).unwrap();

    let out = run(&[
        "refine",
        "--hierarchy",
        fixture("reference/hierarchy.json").to_str().unwrap(),
        "--grades",
        grades.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("missing: [G]"), "stderr: {err}");
}

#[test]
fn refine_reports_reversal_induced_cycle_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "refine",
        "--hierarchy",
        fixture("cycle/hierarchy.csv").to_str().unwrap(),
        "--grades",
        fixture("cycle/grades.csv").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("cycle"), "stderr: {err}");
    for skill in ["X", "Y", "Z"] {
        assert!(err.contains(skill), "stderr: {err}");
    }
    // outputs are still written alongside the warning
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn invalid_threshold_flags_fail_with_exit_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let hierarchy = fixture("reference/hierarchy.json");
    let grades = fixture("reference/grades.csv");
    let base = [
        "refine",
        "--hierarchy",
        hierarchy.to_str().unwrap(),
        "--grades",
        grades.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ];

    let mut args = base.to_vec();
    args.extend(["--s1", "3"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("s1 must be negative"));

    let mut args = base.to_vec();
    args.extend(["--s2", "6", "--s3", "6"]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("s3 must exceed s2"));
}

#[test]
fn validate_accepts_reference_inputs() {
    let out = run(&[
        "validate",
        "--hierarchy",
        fixture("reference/hierarchy.json").to_str().unwrap(),
        "--grades",
        fixture("reference/grades.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_is_deterministic_and_recovers_a_reversal() {
    let dir = tempfile::tempdir().unwrap();
    let cohort = dir.path().join("cohort_spec.json");
    std::fs::write(
        &cohort,
        r#"{"n_learners": 60, "noise_spread": 2.0, "base_grade_range": [6.0, 14.0], "seed": 7}"#,
    )
    .unwrap();

    let run_once = |out_dir: &Path| {
        let out = run(&[
            "simulate",
            "--hierarchy",
            fixture("reference/hierarchy.json").to_str().unwrap(),
            "--cohort",
            cohort.to_str().unwrap(),
            "--reverse",
            "A:B",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
        out
    };

    let first_dir = dir.path().join("a");
    let second_dir = dir.path().join("b");
    std::fs::create_dir_all(&first_dir).unwrap();
    std::fs::create_dir_all(&second_dir).unwrap();
    run_once(&first_dir);
    run_once(&second_dir);

    for name in ["cohort.csv", "report.json", "recovery.json"] {
        let a = std::fs::read(first_dir.join(name)).unwrap();
        let b = std::fs::read(second_dir.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let recovery: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first_dir.join("recovery.json")).unwrap())
            .unwrap();
    let accuracy = recovery["accuracy"].as_f64().unwrap();
    assert!(accuracy >= 0.8, "recovery: {recovery}");
    // the mis-oriented link itself is flipped back
    let reversed_recall = recovery["recall"][1].as_f64().unwrap();
    assert_eq!(reversed_recall, 1.0, "recovery: {recovery}");
}
