use std::fs;
use std::process::Command;

fn dephase() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dephase"))
}

#[test]
fn figure_writes_lf_csv_with_units() {
    let dir = tempfile::tempdir().unwrap();
    let status = dephase()
        .args([
            "figure",
            "entroevo",
            "grids.t={\"start\": 0, \"stop\": 2, \"count\": 5}",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("entroevo_lambda0.2.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t[hbar/alpha],S_A[k_B],S_B[k_B],S_A_exact[k_B],S_B_exact[k_B],S_A+S_B-I[k_B]"
    );
    assert_eq!(lines.count(), 5);
    assert!(dir.path().join("entroevo_lambda0.csv").exists());
}

#[test]
fn run_reads_config_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"scenario": "custom", "physics": {"mu": -3, "T": 0.1}, "grids": {"t": [1, 2]}, "output": {"precision": 8}}"#,
    )
    .unwrap();
    let out = dir.path().join("o");
    let status = dephase()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--stats", "boltzmann"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("custom.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("mu[alpha],t[hbar/alpha],Nbar[1],Ebar[alpha],Qbar[alpha],J_Nmu[1]"));
}

#[test]
fn invalid_config_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"scenario": "custom", "grids": {"t": [0, 3, 2]}}"#).unwrap();
    let out = dephase().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("grids.t"));
}

#[test]
fn linear_response_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = dephase()
        .args([
            "figure",
            "custom",
            "physics.T=0.2",
            "physics.delta_T=0.1",
            "grids.t=[1]",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: delta_T/T"));
}

#[test]
fn accept_single_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let out = dephase()
        .args(["accept", "--only", "C1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("PASS C1"));
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
            .count(),
        1
    );
    let csv = fs::read_to_string(dir.path().join("acceptance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let bad = dephase().args(["accept", "--only", "C42"]).output().unwrap();
    assert!(!bad.status.success());
}

#[test]
fn output_is_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let status = dephase()
            .args([
                "figure",
                "onsevo1",
                "grids.t={\"start\": 0, \"stop\": 4, \"count\": 9}",
                "--threads",
                threads,
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out.join("onsevo1_mu1.9.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
