use std::path::Path;
use std::process::Command;

use cdglue_cli::builtins::{self, BUILTINS};
use cdglue_cli::{prepare, run, CliError, Scenario, Status};

fn cdglue(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cdglue")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const FLAT_INTERVAL: &str = r#"
name = "flat"

[[intervals]]
name = "unit"
a = 0.0
b = 1.0
density = "1"
k = 0.0
n = 2.0

[[tasks]]
kind = "kn_concavity"
interval = "unit"
"#;

#[test]
fn every_builtin_validates_and_round_trips() {
    assert_eq!(BUILTINS.len(), 8);
    for b in &BUILTINS {
        let s = builtins::scenario(b.name).unwrap();
        assert_eq!(s.name, b.name);
        prepare(&s).unwrap_or_else(|e| panic!("{}: {e}", b.name));
        assert_eq!(Scenario::from_toml(&s.to_toml()).unwrap(), s);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(Scenario::from_json(&json).unwrap(), s);
    }
}

#[test]
fn builtins_and_describe() {
    let (code, out, _) = cdglue(&["builtins"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("weighted-disk"));
    let (code, out, _) = cdglue(&["describe", "1d-affine-fail"]);
    assert_eq!(code, 0);
    assert_eq!(Scenario::from_toml(&out).unwrap().name, "1d-affine-fail");
    let (code, _, err) = cdglue(&["describe", "torus"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown builtin"));
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = FLAT_INTERVAL.replace("density = \"1\"", "density = \"1\"\ncolour = \"red\"");
    let path = write(dir.path(), "bad.toml", &bad);
    let (code, _, err) = cdglue(&["run", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"), "{err}");
    let bad = FLAT_INTERVAL.replace("interval = \"unit\"", "interval = \"unit\"\nsamples = 64\nextra = 1");
    assert!(matches!(Scenario::from_toml(&bad), Err(CliError::Schema(m)) if m.contains("extra")));
}

#[test]
fn validation_lists_every_offending_key() {
    let text = FLAT_INTERVAL.replace("density = \"1\"", "density = \"1 +\"")
        + "\n[[tasks]]\nkind = \"wasserstein_scan\"\ninterval = \"nowhere\"\nblocks = 1\n";
    let s = Scenario::from_toml(&text).unwrap();
    let Err(CliError::Validation(keys)) = prepare(&s) else {
        panic!("expected a validation error")
    };
    let joined = keys.join("\n");
    assert!(joined.contains("intervals[0].density"), "{joined}");
    assert!(joined.contains("tasks[1].interval"), "{joined}");
    assert!(joined.contains("tasks[1].blocks"), "{joined}");
}

#[test]
fn passing_and_failing_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let path = write(dir.path(), "flat.toml", FLAT_INTERVAL);
    let (code, stdout, _) = cdglue(&["run", &path, "--out", out]);
    assert_eq!(code, 0, "{stdout}");
    assert!(dir.path().join("flat/report.json").exists());
    let (code, _, _) = cdglue(&["run", "builtin:1d-affine-fail", "--out", out]);
    assert_eq!(code, 1);
    let (code, stdout, _) = cdglue(&["run", "builtin:annulus-doubling", "--out", out]);
    assert_eq!(code, 1);
    assert!(stdout.contains("compatibility      fail") && stdout.contains("needle             fail"), "{stdout}");
}

#[test]
fn focal_point_is_a_numerical_failure_and_later_tasks_still_run() {
    // the disk collar reaches the centre at depth 1
    let text = r#"
name = "focal"
glued = ["disk", "disk"]

[[manifolds]]
name = "disk"
lo = [0.0, 0.0]
hi = [6.283185307179586, 1.0]
diagonal = ["(1-x2)^2", "1"]
weight = "1"
n = 2.0
faces = [{ coord = 2, side = "min", role = "glue" }]

[[tasks]]
kind = "needle"
y = [[1.0]]
t_min = -1.0
t_max = 1.0
k = 0.0
n = 2.0

[[tasks]]
kind = "compatibility"
"#;
    let report = run(&Scenario::from_toml(text).unwrap()).unwrap();
    assert_eq!(report.tasks[0].status, Status::NumericalError);
    let msg = &report.tasks[0].error.as_ref().unwrap().message;
    assert!(msg.contains("focal") || msg.contains("degenerate"), "{msg}");
    assert_eq!(report.tasks[1].status, Status::Pass);
    assert_eq!(report.exit_code, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "focal.toml", text);
    assert_eq!(cdglue(&["run", &path, "--out", dir.path().to_str().unwrap()]).0, 3);
}

#[test]
fn sweep_csv_and_json_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = builtins::scenario("hemisphere-doubling").unwrap();
    s.tasks.retain(|t| t.kind() == "smooth_sweep");
    let path = write(dir.path(), "sweep.json", &serde_json::to_string(&s).unwrap());
    let (code, _, err) = cdglue(&["run", &path, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("hemisphere-doubling/sweep_0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "delta,sup_metric_distance,min_bakry_emery_eig,epsilon");
    let deltas: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(deltas, vec![0.2, 0.1, 0.05]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("hemisphere-doubling/report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert!(report["timing"]["total_seconds"].is_number());
}

#[test]
fn reports_are_deterministic() {
    for name in ["weighted-disk", "1d-sin-doubling"] {
        let s = builtins::scenario(name).unwrap();
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a.deterministic_json(), b.deterministic_json());
        assert!(!a.deterministic_json().contains("timing"));
    }
}
