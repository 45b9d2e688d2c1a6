//! End-to-end CLI behavior: file outputs, wire formats, exit codes.

use std::fs;
use std::process::Command;

fn klab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_klab"))
}

fn write_cfg(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.txt");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn spectrum_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=embedded-circle\nh.center=3.141592653589793,3.141592653589793\nh.r=1\nlambda_max=5\n",
    );
    let out = klab()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .args(["--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("o/spectrum.csv")).unwrap();
    let data_rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("lambda"))
        .count();
    assert_eq!(data_rows, 81);
    assert!(csv.starts_with("# config="));

    // lambda_max = 0 leaves exactly the constant mode.
    let out = klab()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .args([
            "--lambda-max",
            "0",
            "--out",
            dir.path().join("o0").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("o0/spectrum.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("lambda"))
        .collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains("(0,0)"));
}

#[test]
fn invalid_lattice_exits_2_with_machine_parsable_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nmodel.lattice=1,2,2,4\nh.kind=embedded-circle\nh.center=0,0\nh.r=1\n",
    );
    let out = klab()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config: singular lattice"), "stderr: {err}");
}

#[test]
fn qtable_wire_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=embedded-circle\nh.center=3.141592653589793,3.141592653589793\nh.r=1\nnodes=64\nt_max=10\nmeasure_floor=0.05\n",
    );
    let out = klab()
        .args(["qtable", "--config"])
        .arg(&cfg)
        .args(["--out", dir.path().join("q").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("q/qtable.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["model"]["kind"], "flat-torus");
    assert_eq!(v["h"]["kind"], "embedded-circle");
    assert_eq!(v["t_max"], 10.0);
    let clusters = v["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), 2);
    assert!((clusters[0]["t"].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((clusters[1]["q_im"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(
        (clusters[1]["support_measure"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs()
            < 1e-9
    );
    let averaging = v["averaging"].as_array().unwrap();
    assert_eq!(averaging.len(), 3);
    assert!((averaging[2]["T"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    assert!((averaging[2]["A"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    assert!(v["config_hash"].is_string());
    assert!(v["version"].is_string());
}

#[test]
fn point_h_qtable_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=point\nh.anchor=1.0,2.0\nnodes=64\nt_max=10\n",
    );
    let out = klab()
        .args(["qtable", "--config"])
        .arg(&cfg)
        .args(["--out", dir.path().join("q").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("q/qtable.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["clusters"].as_array().unwrap().is_empty());
}

#[test]
fn report_files_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=embedded-circle\nh.center=3.141592653589793,3.141592653589793\nh.r=1\nlambda_max=40\nnodes=64\nt_max=10\ngrid=midpoints:20:40\n",
    );
    let out = klab()
        .args(["report", "--config"])
        .arg(&cfg)
        .args([
            "--out",
            dir.path().join("r").to_str().unwrap(),
            "--threads",
            "4",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["counting.csv", "report.json", "figure1.gp"] {
        assert!(dir.path().join("r").join(name).exists(), "{name} missing");
    }
    let csv = fs::read_to_string(dir.path().join("r/counting.csv")).unwrap();
    let mut checked = 0;
    for line in csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("lambda"))
        .take(50)
    {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 5);
        // residual = N - main - q_term pointwise by definition (fitted C
        // shifts all residuals uniformly; this config leaves it tiny).
        let (lam, n, main, q, r) = (cols[0], cols[1], cols[2], cols[3], cols[4]);
        assert!(lam >= 20.0 && lam <= 40.0);
        // Two-term closeness: the residual is O(1)-small.
        assert!((n - main - q).abs() < 1.5, "two-term residual too large");
        assert!(r.is_finite());
        checked += 1;
    }
    assert!(checked > 10);
    let gp = fs::read_to_string(dir.path().join("r/figure1.gp")).unwrap();
    assert!(gp.contains("counting.csv"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r/report.json")).unwrap())
            .unwrap();
    assert!(report["fitted_c"].is_number());
    assert_eq!(report["windows"].as_array().unwrap().len(), 4);
    assert_eq!(report["kernel"]["a"], 0.5);
    // The echoed config excludes execution-only keys.
    assert!(report["config"].get("threads").is_none());
}

#[test]
fn verify_exit_codes() {
    // Point scenario: all applicable criteria pass -> exit 0.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=point\nh.anchor=1.0,2.0\nlambda_max=200\n",
    );
    let out = klab()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--out", dir.path().join("v").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  4 PASS"));

    // Torus scenario: criterion 10's documented red half -> exit 1.
    let cfg = write_cfg(
        dir.path(),
        "model.kind=flat-torus\nmodel.n=2\nh.kind=embedded-circle\nh.center=3.141592653589793,3.141592653589793\nh.r=1\n",
    );
    let out = klab()
        .args(["verify", "--config"])
        .arg(&cfg)
        .args(["--out", dir.path().join("v2").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{"model":{"kind":"flat-torus","n":2},
            "h":{"kind":"embedded-circle","center":[3.141592653589793,3.141592653589793],"r":1},
            "lambda_max":5}"#,
    )
    .unwrap();
    let out = klab()
        .args(["spectrum", "--config"])
        .arg(&path)
        .args(["--out", dir.path().join("oj").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("oj/spectrum.csv")).unwrap();
    assert_eq!(
        csv.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("lambda"))
            .count(),
        81
    );
}
