//! End-to-end checks of the binary: exit codes, reproducibility, and the
//! sweep aggregation format.

use std::path::Path;
use std::process::Command;

fn swarmlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarmlab"))
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = swarmlab().args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = swarmlab().args(["simulate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_reports_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[run]\nsystem = \"frame\"\nbogus = 1\n").unwrap();
    let out = swarmlab()
        .args(["simulate", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn passing_suite_exits_zero() {
    let out = swarmlab().args(["verify", "means"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.matches("PASS").count(), 5);
    assert!(text.contains("summary: suite=means total=5 passed=5 failed=0"));
}

#[test]
fn failing_suite_exits_one() {
    // The stated-window decay suite documents a pre-crossover window and
    // reports its misses; the exit status must reflect them.
    let out = swarmlab().args(["verify", "decay-stated"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL"));
}

#[test]
fn singular_frame_is_a_numerical_abort() {
    // A rotating state has zero mean velocity: the frame is undefined.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rotating.toml");
    std::fs::write(
        &path,
        r#"
[run]
system = "frame"

[scenario]
kind = "rotating"
n = 4

[integrator]
method = "adaptive-rk45"
t_end = 1.0
sample_stride = 0.5
"#,
    )
    .unwrap();
    let out = swarmlab()
        .args(["simulate", "--config"])
        .arg(&path)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // The manifest is still written, with the error recorded.
    let manifest = std::fs::read_to_string(dir.path().join("out/manifest.toml")).unwrap();
    assert!(manifest.contains("error ="));
}

fn run_simulate(out: &Path, seed: &str) {
    let status = swarmlab()
        .args(["simulate", "--preset", "figure2", "--seed", seed, "--out"])
        .arg(out)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn identical_seeds_give_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    run_simulate(&dir.path().join("a"), "11");
    run_simulate(&dir.path().join("b"), "11");
    run_simulate(&dir.path().join("c"), "12");
    let a = std::fs::read(dir.path().join("a/trajectory.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/trajectory.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c/trajectory.csv")).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn zero_amplitude_scenario_gives_constant_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    std::fs::write(
        &path,
        r#"
[run]
system = "frame"

[scenario]
kind = "translating-perturbed"
n = 3
amplitude = 0.0

[integrator]
method = "adaptive-rk45"
t_end = 10.0
sample_stride = 1.0
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = swarmlab()
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    let parse = |line: &str| -> Vec<f64> {
        line.split(',').skip(1).map(|v| v.parse().unwrap()).collect()
    };
    let first = parse(lines[1]);
    for line in &lines[2..] {
        for (a, b) in parse(line).iter().zip(&first) {
            assert!((a - b).abs() < 1e-12, "columns moved in an empty scenario");
        }
    }
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        r#"
[run]
system = "frame"

[scenario]
kind = "random-near-zf"
n = 4
amplitude = 0.05

[integrator]
method = "adaptive-rk45"
t_end = 100.0
sample_stride = 2.0

[sweep]
n = [3, 4]
amplitude = [0.05]
seeds = 2
window = [10.0, 100.0]
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = swarmlab()
        .args(["sweep", "--config"])
        .arg(&path)
        .args(["--workers", "2", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "header plus 2 n x 1 amplitude x 2 seeds");
    assert!(lines[0].starts_with("seed,n,amplitude,slope_a_max"));
    assert!(out_dir.join("manifest.toml").exists());
}
