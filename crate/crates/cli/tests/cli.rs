use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn drsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drsub"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("drsub-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_packing_linear_fixture() {
    let f = fixture("linear_packing.json");
    let out = drsub(&["solve-packing", f.to_str().unwrap(), "--eps", "0.05"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = json(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["feasible"], true);
    assert_eq!(r["termination"], "converged");
    assert!(r["slack"].as_f64().unwrap() >= 0.0);
    assert!(!r["guess_trace"].as_array().unwrap().is_empty());
}

#[test]
fn verify_linear_fixture_meets_bound() {
    let f = fixture("linear_packing.json");
    let out = drsub(&["verify", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let ratio = r["ratio"].as_f64().unwrap();
    assert!(ratio >= 1.0 - (-0.5f64).exp(), "ratio {ratio}");
    assert_eq!(r["known_opt"], 0.95);
}

#[test]
fn verify_matroid_fixtures() {
    for name in [
        "coverage_uniform.json",
        "cut_partition.json",
        "sampled_laminar.json",
    ] {
        let f = fixture(name);
        let out = drsub(&["verify", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(json(&out)["meets_bound"], true, "{name}");
    }
}

#[test]
fn eps_out_of_range_rejected() {
    let f = fixture("linear_packing.json");
    let out = drsub(&["solve-packing", f.to_str().unwrap(), "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, 0.05]"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let f = fixture("linear_packing.json");
    assert_eq!(
        drsub(&["solve-packing", f.to_str().unwrap(), "--frobnicate"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn monotone_mode_refuses_cut_objective() {
    let f = fixture("cut_packing.json");
    let out = drsub(&["solve-packing", f.to_str().unwrap(), "--monotone", "true"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not monotone"));
}

#[test]
fn constraint_kind_must_match_subcommand() {
    let f = fixture("linear_packing.json");
    assert_eq!(
        drsub(&["solve-matroid", f.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn exit_codes_follow_termination() {
    let f = fixture("linear_packing.json");
    let path = f.to_str().unwrap();
    let rejected = drsub(&["solve-packing", path, "--guess", "95"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert_eq!(json(&rejected)["termination"], "guess_rejected");
    let capped = drsub(&["solve-packing", path, "--guess", "0.95", "--max-iters", "2"]);
    assert_eq!(capped.status.code(), Some(4));
    assert_eq!(json(&capped)["termination"], "iteration_cap");
}

#[test]
fn reports_are_byte_identical() {
    for (cmd, name, guess) in [
        ("solve-packing", "cut_packing.json", "auto"),
        ("solve-matroid", "sampled_laminar.json", "2"),
    ] {
        let f = fixture(name);
        let a = drsub(&[cmd, f.to_str().unwrap(), "--seed", "5", "--guess", guess]);
        let b = drsub(&[cmd, f.to_str().unwrap(), "--seed", "5", "--guess", guess]);
        let c = drsub(&[
            cmd,
            f.to_str().unwrap(),
            "--seed",
            "5",
            "--guess",
            guess,
            "--wallclock-parallel",
        ]);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stdout, c.stdout);
    }
}

#[test]
fn seed_changes_sampled_estimates() {
    let f = fixture("sampled_laminar.json");
    let a = drsub(&[
        "solve-matroid",
        f.to_str().unwrap(),
        "--seed",
        "1",
        "--guess",
        "2",
    ]);
    let b = drsub(&[
        "solve-matroid",
        f.to_str().unwrap(),
        "--seed",
        "2",
        "--guess",
        "2",
    ]);
    assert_ne!(json(&a)["solution"], json(&b)["solution"]);
}

#[test]
fn report_file_matches_stdout() {
    let f = fixture("coverage_uniform.json");
    let out_path = scratch("report.json");
    let out = drsub(&[
        "solve-matroid",
        f.to_str().unwrap(),
        "--report",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&out_path).unwrap(), out.stdout);
}

#[test]
fn invalid_instance_names_the_field() {
    let text = std::fs::read_to_string(fixture("linear_packing.json")).unwrap();
    let bad = scratch("negative.json");
    std::fs::write(&bad, text.replace("[1.0, 1.0]", "[1.0, -1.0]")).unwrap();
    let out = drsub(&["solve-packing", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective.weights[1]"));
}

#[test]
fn selftest_passes() {
    let out = drsub(&["selftest", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["seed"], 3);
}
