use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabvar"))
        .args(args)
        .env_remove("STABVAR_SEED")
        .output()
        .expect("failed to launch stabvar")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn numvar_csv_has_versioned_metadata_and_rows() {
    let out = run(&["numvar", "--alpha", "1", "--c", "1", "--L", "1:3:1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with(&format!("# stabvar {}\n", env!("CARGO_PKG_VERSION"))));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4, "{text}");
    assert!(rows[1].starts_with("1,"));
    assert!(rows[3].starts_with("3,"));
}

#[test]
fn numvar_json_parses() {
    let out = run(&["numvar", "--alpha", "1.5", "--c", "1", "--L", "0.5,2", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["meta"].is_object());
    assert!(v["data"].is_array() || v["data"].is_object());
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let args = ["simulate", "--alpha", "0.9", "--c", "1", "--L", "2", "--replications", "2000", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "10";
    assert_ne!(run(&other).stdout, a.stdout);
}

#[test]
fn gp_paths_are_byte_identical_for_a_fixed_seed() {
    let args = ["gp", "--paths", "--alpha", "1.2", "--c", "1", "--grid", "1:4:1", "--replications", "50", "--seed", "3"];
    let a = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(&args).stdout);
}

#[test]
fn covariance_at_the_origin_is_zero() {
    let out = run(&["gp", "--cov", "--alpha", "1", "--c", "1", "--grid", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["s,0", "0,0"]);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["numvar", "--alpha", "1", "--c", "1", "--L", "3:1:1"]).status.code(), Some(1));
    assert_eq!(run(&["numvar", "--alpha", "2.5", "--c", "1", "--L", "1"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--alpha", "1", "--c", "1", "--L", "1", "--replications", "10"]).status.code(), Some(1));
    assert_eq!(run(&["gp", "--fbm-limit", "--alpha", "1.5", "--c", "1"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
}

#[test]
fn budget_errors_exit_with_two() {
    let out = run(&["simulate", "--alpha", "1", "--c", "1", "--L", "2", "--replications", "1000", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn failed_acceptance_exits_with_three() {
    let out = run(&["accept", "--tolerance-scale", "0", "--mc-seeds", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_pass"], false);
}
