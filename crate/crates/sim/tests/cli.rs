use std::fs;
use std::path::Path;
use std::process::Command;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bundleobs-sim"))
}

fn write(dir: &Path, file: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(file);
    fs::write(&p, text).unwrap();
    p
}

fn code(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn zero_error_attitude_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.cfg",
        "name = zero\nsystem = attitude\nt_final = 2\nstep = 1e-2\n",
    );
    let out = sim()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("zero_trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 9 + 9 + 2);
    assert_eq!(header[0], "t");
    assert_eq!(&header[header.len() - 2..], ["Ve", "zeta_e_norm"]);
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201);
    assert!(rows
        .iter()
        .all(|r| r.len() == header.len() && r.iter().all(|x| x.is_finite())));
    assert!(rows.iter().all(|r| r[19] <= 1e-12));

    let report = fs::read_to_string(dir.path().join("zero_report.txt")).unwrap();
    assert!(report.contains("final_Ve:"));
    assert!(report.contains("final_error_angle_rad:"));
    assert!(report.contains("monotone_Ve: yes"));
}

#[test]
fn output_key_is_used_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("nested");
    let cfg = write(
        dir.path(),
        "d.cfg",
        &format!(
            "name = disc\nsystem = slam_discrete\nsteps = 5\noutput = {}\n",
            target.display()
        ),
    );
    assert_eq!(code(sim().arg("run").arg(&cfg)), 0);
    let report = fs::read_to_string(target.join("disc_report.txt")).unwrap();
    assert!(report.contains("max_relative_recovery_error:"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.cfg", "name = x\nsystem = pendulum\n");
    assert_eq!(code(sim().arg("run").arg(&bad).arg("--out-dir").arg(dir.path())), 2);
    assert_eq!(code(sim().arg("run").arg(dir.path().join("missing.cfg"))), 2);
    assert_eq!(code(sim().arg("run")), 2);
    assert_eq!(code(sim().arg("bogus")), 2);
}

#[test]
fn blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.cfg",
        "name = b\nsystem = slam_continuous\nmethod = lie_euler\ngain = 1e308\nstep = 0.1\nt_final = 1\nerror_twist = 1, 2, 0, 0, 0, 0\n",
    );
    let out = sim()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blowup"));
}

#[test]
fn parallel_runs_report_worst_code() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "g.cfg",
        "name = g\nsystem = sphere_split_demo\nt_final = 0.5\nstep = 1e-2\n",
    );
    let bad = write(dir.path(), "bad.cfg", "name = g2\nsystem = attitude\ngain = -1\n");
    let status = code(
        sim()
            .args(["--jobs", "2", "run"])
            .arg(&good)
            .arg(&bad)
            .arg("--out-dir")
            .arg(dir.path()),
    );
    assert_eq!(status, 2);
    assert!(dir.path().join("g_trajectory.csv").exists());
}

#[test]
fn audit_exit_codes() {
    let out = sim()
        .args(["audit", "equivariance", "--samples", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.contains("attitude vector field")));
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
    assert_eq!(
        code(sim().args(["audit", "gradient", "--samples", "10", "--seed", "3"])),
        0
    );
    assert_eq!(code(sim().args(["audit", "gradient", "--samples", "0"])), 2);
    assert_eq!(code(sim().args(["audit", "nothing"])), 2);
    assert_eq!(code(sim().args(["audit", "autonomy", "--samples", "1"])), 0);
}
