use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn subgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subgrad"))
        .args(args)
        .env_remove("SUBGRAD_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn relu_defaults_write_five_escaping_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&["run", "--problem", "relu-l1", "--out-dir", path(dir.path())]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for i in 0..5 {
        assert!(dir.path().join(format!("trial_{i}.csv")).exists());
    }
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("escaped = 5\n"), "{summary}");
    assert!(stdout(&o).contains("escaped 5/5"));
}

#[test]
fn abs_control_small_step_never_escapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&[
        "run",
        "--problem",
        "abs-control",
        "--alpha-lo",
        "1e-4",
        "--alpha-hi",
        "1e-4",
        "--max-iters",
        "20000",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("escaped = 0\n"), "{summary}");
}

#[test]
fn rpca_synthetic_escapes() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&[
        "run",
        "--problem",
        "rpca",
        "--rank",
        "2",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("escaped 5/5"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("trial_0.csv")).unwrap();
    assert!(csv.starts_with("k,alpha,f,C,dS,escaped,norm_x_minus_xstar\n"));
}

#[test]
fn config_file_and_env_var() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        format!(
            "problem = relu-l1\ntrials = 2\nout_dir = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_subgrad"))
        .arg("run")
        .env("SUBGRAD_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("trial_1.csv").exists());
    assert!(!out.join("trial_2.csv").exists());

    let o = subgrad(&["run", "--config", path(&cfg), "--problem", "rpca"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&[
        "certify",
        "relu-l1",
        "verdier",
        "subregularity",
        "--samples",
        "2000",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let verdier = fs::read_to_string(dir.path().join("verdier.txt")).unwrap();
    assert!(verdier.contains("verdict = satisfied"), "{verdier}");
    assert!(dir.path().join("subregularity.txt").exists());

    let o = subgrad(&[
        "certify",
        "verdier-fail",
        "verdier",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdier: violated"), "{}", stdout(&o));

    let o = subgrad(&[
        "certify",
        "rpca",
        "local-min",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let local = fs::read_to_string(dir.path().join("local-min.txt")).unwrap();
    assert!(local.contains("detail.spurious = true"), "{local}");
}

#[test]
fn replay_round_trip_and_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&["run", "--trials", "1", "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("trial_0.csv");
    let o = subgrad(&["replay", path(&csv)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).starts_with("Satisfied"));

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[4].split(',').map(String::from).collect();
    let x1: f64 = fields[7].parse().unwrap();
    fields[7] = (x1 * (1.0 + 1e-12)).to_string();
    lines[4] = fields.join(",");
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, lines.join("\n")).unwrap();
    let o = subgrad(&["replay", path(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("Violated at row 3"), "{}", stdout(&o));

    let o = subgrad(&["replay", path(&csv), "--problem", "abs-control"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(subgrad(&["replay", path(&empty)]).status.code(), Some(5));
    assert_eq!(
        subgrad(&["run", "--problem", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        subgrad(&["certify", "relu-l1", "nope", "--out-dir", path(dir.path())])
            .status
            .code(),
        Some(2)
    );

    let ragged = dir.path().join("m.csv");
    fs::write(&ragged, "0,0\n1\n").unwrap();
    let o = subgrad(&[
        "run",
        "--problem",
        "rpca",
        "--matrix",
        path(&ragged),
        "--rank",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(5));
    let missing = dir.path().join("missing.csv");
    let o = subgrad(&["run", "--problem", "rpca", "--matrix", path(&missing)]);
    assert_eq!(o.status.code(), Some(5));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = subgrad(&[
        "run",
        "--trials",
        "1",
        "--out-dir",
        path(&blocker.join("sub")),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn matrix_csv_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    fs::write(&m, "0,0,0\n1.5,-2,0.5\n-1,0.25,3\n2,1,-1\n").unwrap();
    let o = subgrad(&[
        "run",
        "--problem",
        "rpca",
        "--matrix",
        path(&m),
        "--rank",
        "1",
        "--trials",
        "2",
        "--out-dir",
        path(&dir.path().join("out")),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/trial_0.csv")).unwrap();
    assert!(csv.starts_with("k,alpha,f,C,dS,escaped,x0,"));
}

#[test]
fn sweep_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = subgrad(&[
        "sweep",
        "--alpha-steps",
        "3",
        "--trials",
        "4",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.05,4,"));
    assert!(lines[3].starts_with("0.15,4,"));
}
