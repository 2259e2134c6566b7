use std::path::Path;
use std::process::{Command, Output};

fn qet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qet"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn setting1_writes_one_row_per_separation() {
    let dir = tempfile::tempdir().unwrap();
    let o = qet(
        &[
            "setting1", "--n", "100", "--alpha", "a4", "--d-max", "40", "--out", "s1.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("s1.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 42);
    assert_eq!(
        lines[0],
        "d,E_B_opt,E_N_before,E_N_after,delta_E_N,S_M_before,S_M_after,delta_S_M"
    );
    let out = stdout(&o);
    assert!(out.contains("# quantity amplitude exponent offset r2 window"));
    assert!(out
        .lines()
        .any(|l| l.starts_with("E_B_abs ") && l.ends_with("[10,40]")));
    assert!(out.lines().any(|l| l.starts_with("delta_S_M ")));
}

#[test]
fn size_sweep_rows_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let o = qet(
        &[
            "size-sweep",
            "--alpha",
            "a4",
            "--n-list",
            "20,40,60,80,100",
            "--out",
            "n.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("N,delta_E_N,E_B_abs,beta\n"));
    let out = stdout(&o);
    for q in ["delta_E_N ", "E_B_abs ", "beta "] {
        assert!(
            out.lines().any(|l| l.starts_with(q)),
            "missing {q} in {out}"
        );
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "3")] {
        let o = qet(
            &[
                "setting2",
                "--n",
                "40",
                "--alpha",
                "a3",
                "--out",
                name,
                "--threads",
                threads,
            ],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "n = 40\nd-max = 5\nalpha = a1\n",
    )
    .unwrap();
    let o = qet(
        &["setting1", "--config", "run.conf", "--d-max", "7"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // default output name
    let csv = std::fs::read_to_string(dir.path().join("setting1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["setting1", "--bogus", "1"][..],
        &["setting1", "--n", "abc"],
        &["setting2", "--n", "7"],
        &["size-sweep", "--n-list", "20,21"],
        &["teleport"],
    ] {
        let o = qet(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains("Usage"),
            "{args:?}"
        );
    }
    std::fs::write(dir.path().join("bad.conf"), "colour = red\n").unwrap();
    let o = qet(&["setting1", "--config", "bad.conf"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = qet(&["validate", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().count() >= 8);
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
}
