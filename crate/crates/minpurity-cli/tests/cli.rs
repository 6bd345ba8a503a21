//! End-to-end tests of the command-line surface: exit codes, JSON
//! artifacts, determinism and the tolerance override.

use std::path::Path;
use std::process::{Command, Output};

fn minpurity(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minpurity"))
        .args(args)
        .current_dir(dir)
        .env_remove("MINPURITY_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

#[test]
fn build_then_verify_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let built = minpurity(dir.path(), &["build", "--dim", "3"]);
    assert_eq!(code(&built), 0, "{}", stderr(&built));
    assert!(dir.path().join("scheme.json").exists());
    assert!(stdout(&built).contains("variant = odd-minimal"));

    let verified = minpurity(dir.path(), &["verify"]);
    assert_eq!(code(&verified), 0, "{}", stderr(&verified));
    assert!(stdout(&verified).contains("verification: PASS"));
    let residual_line = stdout(&verified)
        .lines()
        .find(|l| l.starts_with("residual"))
        .expect("residual line")
        .to_owned();
    let value: f64 = residual_line
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(value < 1e-9);
}

#[test]
fn minimal_build_in_even_dimension_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(dir.path(), &["build", "--dim", "4", "--minimal"]);
    assert_eq!(code(&output), 3);
    assert!(stderr(&output).contains("even dimension"));
    let output = minpurity(
        dir.path(),
        &["build", "--dim", "4", "--variant", "odd-minimal"],
    );
    assert_eq!(code(&output), 3);
}

#[test]
fn build_rejects_dimension_below_two() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(dir.path(), &["build", "--dim", "1"]);
    assert_eq!(code(&output), 4);
}

#[test]
fn fixture_variants_build_for_two_and_three() {
    let dir = tempfile::tempdir().unwrap();
    for dim in ["2", "3"] {
        let output = minpurity(dir.path(), &["build", "--dim", dim, "--variant", "fixture"]);
        assert_eq!(code(&output), 0, "{}", stderr(&output));
    }
    let output = minpurity(dir.path(), &["build", "--dim", "5", "--variant", "fixture"]);
    assert_eq!(code(&output), 3);
}

#[test]
fn unknown_variant_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(dir.path(), &["build", "--dim", "3", "--variant", "bogus"]);
    assert_eq!(code(&output), 4);
}

#[test]
fn verify_with_tight_tolerance_fails_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let built = minpurity(dir.path(), &["build", "--dim", "3"]);
    assert_eq!(code(&built), 0);
    let verified = Command::new(env!("CARGO_BIN_EXE_minpurity"))
        .args(["verify"])
        .current_dir(dir.path())
        .env("MINPURITY_TOL", "1e-20")
        .output()
        .unwrap();
    assert_eq!(verified.status.code().unwrap(), 2);
}

#[test]
fn malformed_scheme_json_is_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("scheme.json"), "{ not json").unwrap();
    let output = minpurity(dir.path(), &["verify"]);
    assert_eq!(code(&output), 4);

    // structurally valid JSON that is not a scheme
    std::fs::write(dir.path().join("scheme.json"), r#"{"dim": 3}"#).unwrap();
    let output = minpurity(dir.path(), &["verify"]);
    assert_eq!(code(&output), 4);
}

#[test]
fn corrupted_unitary_fails_parse_validation() {
    let dir = tempfile::tempdir().unwrap();
    let built = minpurity(dir.path(), &["build", "--dim", "3"]);
    assert_eq!(code(&built), 0);
    let path = dir.path().join("scheme.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut scheme: serde_json::Value = serde_json::from_str(&text).unwrap();
    scheme["unitary"]["re"][0] = serde_json::json!(7.5);
    std::fs::write(&path, serde_json::to_string(&scheme).unwrap()).unwrap();
    let output = minpurity(dir.path(), &["verify"]);
    assert_eq!(code(&output), 4, "{}", stderr(&output));
}

#[test]
fn simulate_writes_report_and_validates_shots() {
    let dir = tempfile::tempdir().unwrap();
    minpurity(dir.path(), &["build", "--dim", "3"]);

    let zero_shots = minpurity(dir.path(), &["simulate", "--shots", "0"]);
    assert_eq!(code(&zero_shots), 4);

    let output = minpurity(
        dir.path(),
        &[
            "simulate", "--state", "mixed", "--shots", "100000", "--seed", "9", "--out",
            "report.json",
        ],
    );
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let exact = report["exact_probability"].as_f64().unwrap();
    assert!((exact - 2.0 / 3.0).abs() < 1e-12);
    let recovered = report["recovered_value"].as_f64().unwrap();
    assert!((recovered - 1.0 / 3.0).abs() < 0.05);
    assert!(stdout(&output).contains("recovered purity"));
}

#[test]
fn simulate_without_out_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    minpurity(dir.path(), &["build", "--dim", "3"]);
    let output = minpurity(dir.path(), &["simulate", "--state", "mixed", "--shots", "10"]);
    assert_eq!(code(&output), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["shots"].as_u64().unwrap(), 10);
}

#[test]
fn simulate_overlap_with_state_files() {
    let dir = tempfile::tempdir().unwrap();
    minpurity(dir.path(), &["build", "--dim", "2", "--variant", "even-two-body"]);
    // rho = diag(0.7, 0.3), sigma = diag(0.2, 0.8): overlap 0.38
    std::fs::write(
        dir.path().join("rho.json"),
        r#"{"rows":2,"cols":2,"re":[0.7,0.0,0.0,0.3],"im":[0.0,0.0,0.0,0.0]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("sigma.json"),
        r#"{"rows":2,"cols":2,"re":[0.2,0.0,0.0,0.8],"im":[0.0,0.0,0.0,0.0]}"#,
    )
    .unwrap();
    let output = minpurity(
        dir.path(),
        &[
            "simulate",
            "--state",
            "rho.json",
            "--sigma",
            "sigma.json",
            "--shots",
            "1000000",
            "--seed",
            "3",
            "--out",
            "overlap.json",
        ],
    );
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("overlap.json")).unwrap())
            .unwrap();
    // exact Pr = (1 - 0.38) / 2 = 0.31
    assert!((report["exact_probability"].as_f64().unwrap() - 0.31).abs() < 1e-12);
}

#[test]
fn simulate_rejects_invalid_state_file() {
    let dir = tempfile::tempdir().unwrap();
    minpurity(dir.path(), &["build", "--dim", "2", "--variant", "auto"]);
    // trace 1.4: not a density operator
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"rows":2,"cols":2,"re":[0.7,0.0,0.0,0.7],"im":[0.0,0.0,0.0,0.0]}"#,
    )
    .unwrap();
    let output = minpurity(dir.path(), &["simulate", "--state", "bad.json", "--shots", "10"]);
    assert_eq!(code(&output), 4);
}

#[test]
fn build_artifacts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    minpurity(dir.path(), &["build", "--dim", "5", "--out", "a.json"]);
    minpurity(dir.path(), &["build", "--dim", "5", "--out", "b.json"]);
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);

    minpurity(
        dir.path(),
        &["simulate", "--scheme", "a.json", "--shots", "5000", "--seed", "11", "--out", "r1.json"],
    );
    minpurity(
        dir.path(),
        &["simulate", "--scheme", "a.json", "--shots", "5000", "--seed", "11", "--out", "r2.json"],
    );
    let r1 = std::fs::read(dir.path().join("r1.json")).unwrap();
    let r2 = std::fs::read(dir.path().join("r2.json")).unwrap();
    assert_eq!(r1, r2);
}

#[test]
fn feasibility_summary_lines() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(
        dir.path(),
        &["feasibility", "--dim", "5", "--minimal", "--out", "f.json"],
    );
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("(k,l,x,y) = (3, 5, 0.5, 0.5)"), "{text}");
    assert!(text.contains("parity certificate: odd"));

    let output = minpurity(
        dir.path(),
        &["feasibility", "--dim", "6", "--minimal", "--out", "g.json"],
    );
    let text = stdout(&output);
    assert!(text.contains("no minimal-model solution"), "{text}");
    assert!(text.contains("parity certificate: inconsistent"));
}

#[test]
fn feasibility_optimize_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(
        dir.path(),
        &[
            "feasibility", "--dim", "2", "--optimize", "--restarts", "2", "--iters", "15",
            "--seed", "1", "--out", "opt.json",
        ],
    );
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("opt.json")).unwrap())
            .unwrap();
    assert!(report["optimizer"]["best_residual"].as_f64().unwrap() > 0.0);
    assert!(stdout(&output).contains("optimizer: best residual"));
}

#[test]
fn subspace_report_json() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(dir.path(), &["subspace", "--dim", "2", "--draws", "25"]);
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["sym_dim"].as_u64().unwrap(), 10);
    assert_eq!(report["asym_dim"].as_u64().unwrap(), 6);
    assert!(report["orthogonality_residual"].as_f64().unwrap() < 1e-10);
    assert!(report["lemma3_residuals"]["max_odd_power_trace"].as_f64().unwrap() < 1e-9);
}

#[test]
fn unknown_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let output = minpurity(dir.path(), &["build", "--dim", "3", "--frobnicate"]);
    assert_eq!(code(&output), 4);
    let output = minpurity(dir.path(), &["--help"]);
    assert_eq!(code(&output), 0);
}
