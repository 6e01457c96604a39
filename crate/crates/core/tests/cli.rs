use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slms-rl1"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn selftest_passes() {
    let out = cli(&["selftest"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(!stdout.contains("[FAIL]"));
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("[PASS]")).count(),
        8
    );
}

#[test]
fn run_writes_outputs_and_echo() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let config = tmp.path().join("exp.toml");
    fs::write(
        &config,
        "runs = 3\niterations = 50\nalgorithms = [\"LMS\", \"SLMS_RL1\"]\n",
    )
    .unwrap();
    let out = cli(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--iterations",
        "40",
        "--dump-channels",
        "--out",
        &out_arg(&dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let echo = fs::read_to_string(dir.join("config.echo")).unwrap();
    assert!(echo.contains("runs = 3"));
    assert!(echo.contains("iterations = 40"));

    let csv = fs::read_to_string(dir.join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iteration,LMS,SLMS_RL1");
    assert_eq!(lines.next().unwrap(), "0,0,0");
    assert_eq!(csv.lines().count(), 41);

    let channels = fs::read_to_string(dir.join("channels.csv")).unwrap();
    assert!(channels.starts_with("run_id,tap_index,value\n"));
    // 2 algorithms x 3 runs x K=8 nonzero taps
    assert_eq!(channels.lines().count(), 1 + 2 * 3 * 8);
}

#[test]
fn invalid_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&["run", "--iterations", "0", "--out", &out_arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "lambda_grid = [0.1, 0.01]\n").unwrap();
    let out = cli(&[
        "sweep",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = cli(&["compare", "--axis", "Q"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_selection_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sweep");
    let out = cli(&[
        "sweep",
        "--lambda_grid",
        "10",
        "--k_set",
        "4",
        "--runs",
        "4",
        "--iterations",
        "2000",
        "--out",
        &out_arg(&dir),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let selection = fs::read_to_string(dir.join("selection.txt")).unwrap();
    assert!(selection.starts_with("selected_lambda = none"));
    assert!(selection.contains("10,4,"));
    assert!(dir.join("sweep_K4.csv").exists());
}

#[test]
fn sweep_writes_one_csv_per_k() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cli(&[
        "sweep",
        "--lambda-grid",
        "0,0.001",
        "--k-set",
        "2,4",
        "--runs",
        "3",
        "--iterations",
        "500",
        "--out",
        &out_arg(tmp.path()),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let k2 = fs::read_to_string(tmp.path().join("sweep_K2.csv")).unwrap();
    assert_eq!(
        k2.lines().next().unwrap(),
        "iteration,lambda=0,lambda=0.001"
    );
    assert!(tmp.path().join("sweep_K4.csv").exists());
    let selection = fs::read_to_string(tmp.path().join("selection.txt")).unwrap();
    assert!(selection.starts_with("selected_lambda = "));
}
