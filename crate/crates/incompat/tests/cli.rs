//! Integration tests against the compiled binary: exit codes, JSON and CSV
//! shapes, determinism across reruns and thread counts, and error paths.

use std::path::Path;
use std::process::Command;

fn run(args: &[&str]) -> (i32, String, String) {
    run_with_env(args, &[])
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_incompat"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn write_z_observable(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("z.json");
    std::fs::write(
        &path,
        r#"{
  "dim": 2,
  "effects": [
    { "label": 1, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]] },
    { "label": -1, "matrix": [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]] }
  ]
}"#,
    )
    .unwrap();
    path
}

#[test]
fn check_exit_codes() {
    let (code, stdout, _) = run(&["check", "--builtin", "xyz", "--t", "0.5"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["verdict"], "COMPATIBLE");

    let (code, stdout, _) = run(&["check", "--builtin", "xyz"]);
    assert_eq!(code, 1);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["verdict"], "INCOMPATIBLE");
    assert!(parsed["certificate"]["margin"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_three() {
    let (code, _, stderr) = run(&["check", "--builtin", "nope"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("unknown builtin"));

    let (code, _, _) = run(&["check"]);
    assert_eq!(code, 3);

    let (code, _, stderr) = run(&["robustness", "--builtin", "xyz", "--resolution", "1e-9"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("resolution"));

    let (code, _, _) = run(&["definitely-not-a-subcommand"]);
    assert_eq!(code, 3);
}

#[test]
fn malformed_json_reports_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let (code, _, stderr) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("broken.json"));
    assert!(stderr.contains("line"));
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("robustness"));
    let (code, _, _) = run(&["check", "--help"]);
    assert_eq!(code, 0);
}

#[test]
fn robustness_of_the_axis_triple() {
    let (code, stdout, _) = run(&["robustness", "--builtin", "xyz"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let t_star = parsed["t_star"].as_f64().unwrap();
    assert!((0.5764..=0.5784).contains(&t_star), "t* = {t_star}");
    assert_eq!(parsed["converged"], true);
}

#[test]
fn robustness_of_the_anticommuting_five() {
    let (code, stdout, _) = run(&["robustness", "--builtin", "specker", "--m", "5"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let t_star = parsed["t_star"].as_f64().unwrap();
    assert!((t_star - 1.0 / 5.0f64.sqrt()).abs() < 2e-3, "t* = {t_star}");
}

#[test]
fn duplicate_observable_has_unit_robustness() {
    let dir = tempfile::tempdir().unwrap();
    let z = write_z_observable(dir.path());
    let z = z.to_str().unwrap();
    let (code, stdout, _) = run(&["robustness", z, z]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["t_star"].as_f64().unwrap(), 1.0);
}

#[test]
fn mutually_unbiased_bases_builtin() {
    let (code, _, _) = run(&["check", "--builtin", "mub:3", "--t", "0.2"]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&["check", "--builtin", "mub:3"]);
    assert_eq!(code, 1);
    let (code, _, stderr) = run(&["check", "--builtin", "mub:4"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("prime"));
}

#[test]
fn bounds_table_values_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let (code, stdout, _) = run(&["bounds", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d,n,clone_bound,t_P,t_0,eb_threshold");
    assert_eq!(lines[1], "2,2,0.666667,0.5,0.416667,0.333333");
    assert!(lines.iter().any(|l| l.starts_with("3,2,0.625,")));
    assert_eq!(lines.len(), 1 + 5 * 9);
}

#[test]
fn classify_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wn.json");
    std::fs::write(&path, r#"{ "white_noise": { "d": 2, "t": 0.6 } }"#).unwrap();
    let (code, stdout, stderr) = run(&["classify", path.to_str().unwrap(), "--max-n", "3"]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["ebc"]["status"], "REFUTED");
    assert_eq!(parsed["n_ibc"]["2"]["status"], "CERTIFIED");
    assert_eq!(parsed["n_ibc"]["3"]["status"], "REFUTED");
    assert_eq!(parsed["ibc"]["status"], "REFUTED");
    assert!(stderr.contains("breaks any 2 observables"));
}

#[test]
fn hsm_spin_passes_and_reports() {
    let (code, stdout, _) = run(&[
        "hsm", "--kind", "spin", "--n", "0,0,1", "--samples", "200000", "--seed", "5",
    ]);
    assert_eq!(code, 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(parsed["pass"], true);
    assert_eq!(parsed["target_noise"], 0.5);
    assert!(parsed["max_abs_deviation"].as_f64().unwrap() < 5e-3);
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "hsm", "--kind", "rank1", "--samples", "150000", "--seed", "11",
    ];
    let (c1, first, _) = run(&args);
    let (c2, second, _) = run(&args);
    assert_eq!(c1, 0);
    assert_eq!(c1, c2);
    assert_eq!(first, second);

    let (_, single, _) = run_with_env(&args, &[("INCOMPAT_THREADS", "1")]);
    assert_eq!(first, single);

    let (_, b1, _) = run(&["bounds"]);
    let (_, b2, _) = run(&["bounds"]);
    assert_eq!(b1, b2);
}
