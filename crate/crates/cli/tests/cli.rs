use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const GOLDEN_TABLE: &str = include_str!("golden/efficiency_table.csv");

fn qcycle(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcycle"))
        .args(args)
        .env_remove("QCYCLE_NUM_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const CAVITY_BRAYTON: &str = r#"{
  "substance": {"kind": "cavity", "mode_constant": 1.0},
  "cycle": {"kind": "brayton", "F1": 4, "F0": 1, "L_A": 1, "L_B": 2},
  "output": {"samples_per_segment": 9}
}"#;

#[test]
fn run_prints_a_complete_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CAVITY_BRAYTON);
    let o = qcycle(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["units"], "hbar=m=k=1");
    for key in [
        "Q_in",
        "Q_out",
        "W_net",
        "eta_numeric",
        "eta_closed",
        "gamma",
    ] {
        assert!(report[key].as_f64().unwrap().is_finite(), "{key}");
    }
    assert_eq!(report["eta_closed"].as_f64().unwrap(), 0.5);
    assert!((report["eta_numeric"].as_f64().unwrap() - 0.5).abs() <= 1e-8);
    assert_eq!(report["gamma"].as_f64().unwrap(), 2.0);
    let corners = report["corners"].as_array().unwrap();
    assert_eq!(corners.len(), 4);
    for c in corners {
        for key in ["L", "beta", "T", "F", "U", "S", "regime_parameter"] {
            assert!(c[key].as_f64().unwrap().is_finite(), "{key}");
        }
    }
    assert_eq!(report["diagnostics"]["closed"], true);
    assert!(report["diagnostics"].get("classical_regime").is_none());
}

#[test]
fn box_report_carries_regime_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"substance":{"kind":"box1d"},"cycle":{"kind":"diesel","F1":30,"L1":2,"r_C":0.5,"r_E":0.8},
            "output":{"samples_per_segment":5}}"#,
    );
    let o = qcycle(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((report["eta_closed"].as_f64().unwrap() - 0.57).abs() <= 1e-12);
    assert_eq!(report["diagnostics"]["classical_regime"], false);
    let corner_regime = report["corners"][0]["regime_parameter"].as_f64().unwrap();
    assert!(corner_regime > 1e-6);
}

#[test]
fn run_writes_report_and_diagram_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("out/report.json");
    let diagram = dir.path().join("out/diagram.csv");
    std::fs::create_dir(dir.path().join("out")).unwrap();
    let body = format!(
        r#"{{"substance":{{"kind":"cavity"}},"cycle":{{"kind":"brayton","F1":4,"F0":1,"L_A":1,"L_B":2}},
            "output":{{"report":{:?},"diagram":{:?},"samples_per_segment":6}}}}"#,
        report, diagram
    );
    let cfg = write_config(dir.path(), "c.json", &body);
    let o = qcycle(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["degenerate"], false);

    let csv = std::fs::read_to_string(&diagram).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "segment_index,t,L,beta,T,F,U,S,Q_cum,W_cum"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4 * 6);
    let mut last = (usize::MAX, -1.0);
    for row in &rows {
        assert_eq!(row.len(), 10);
        let segment: usize = row[0].parse().unwrap();
        let t: f64 = row[1].parse().unwrap();
        if segment == last.0 {
            assert!(t > last.1);
        }
        last = (segment, t);
        for v in &row[1..] {
            assert!(v.parse::<f64>().unwrap().is_finite());
            // 17 significant digits in exponent form
            let mantissa = v.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.len(), 18, "{v}");
        }
    }
    assert!(!csv.contains('\r'));
    // isobar at F1 holds the force column
    for row in rows.iter().filter(|r| r[0] == "0") {
        let f: f64 = row[5].parse().unwrap();
        assert!((f - 4.0).abs() <= 1e-10);
    }

    let first = csv.clone();
    let o = qcycle(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&diagram).unwrap(), first);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"substance":{"kind":"box1d"},"cycle":{"kind":"brayton","F1":8,"F0":1,"L_A":1,"L_B":2},"pressure_units":"bar"}"#,
            "pressure_units",
        ),
        (
            r#"{"substance":{"kind":"cavity"},"cycle":{"kind":"diesel","F1":1,"L1":2,"r_C":0.8,"r_E":0.5}}"#,
            "r_C < r_E",
        ),
        (
            r#"{"substance":{"kind":"box4d"},"cycle":{"kind":"otto"}}"#,
            "substance.kind",
        ),
        ("not json", "expected"),
        (
            r#"{"substance":{"kind":"box2d"},"cycle":{"kind":"brayton","F1":8,"F0":1,"L_A":1,"L_B":2}}"#,
            "not available",
        ),
    ];
    for (i, (body, needle)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let o = qcycle(&["run", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{body}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{needle}: {}", stderr(&o));
    }
    let o = qcycle(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn vacuum_force_corner_exits_four() {
    // 2 F1 L_A^2 = kappa puts corner A exactly on the vacuum force
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.json",
        r#"{"substance":{"kind":"cavity"},"cycle":{"kind":"brayton","F1":0.5,"F0":0.25,"L_A":1,"L_B":2}}"#,
    );
    let o = qcycle(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn table_matches_golden() {
    let o = qcycle(&["table"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), GOLDEN_TABLE);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = qcycle(&["table", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out).unwrap(), GOLDEN_TABLE);
}

#[test]
fn check_exit_codes() {
    let o = qcycle(&["check", "--scope", "substance"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));

    let dir = tempfile::tempdir().unwrap();
    let loose = write_config(dir.path(), "loose.json", r#"{"series_tol": 0.5}"#);
    let o = qcycle(&[
        "check",
        "--scope",
        "substance",
        "--numerics",
        loose.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    let invalid = write_config(dir.path(), "invalid.json", r#"{"quad_tol": -1}"#);
    let o = qcycle(&["check", "--numerics", invalid.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn sweep_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn sweep_pressure_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CAVITY_BRAYTON);
    let o = qcycle(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "F0",
        "--from",
        "0.4",
        "--to",
        "3.6",
        "--steps",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("F0,eta_numeric,eta_closed,status\n"));
    let rows = sweep_rows(&csv);
    assert_eq!(rows.len(), 9);
    for row in &rows {
        let f0: f64 = row[0].parse().unwrap();
        let numeric: f64 = row[1].parse().unwrap();
        let closed: f64 = row[2].parse().unwrap();
        assert_eq!(row[3], "0");
        assert!((numeric - closed).abs() <= 1e-8);
        assert!((closed - (1.0 - (f0 / 4.0).sqrt())).abs() <= 1e-12);
    }

    let o = Command::new(env!("CARGO_BIN_EXE_qcycle"))
        .args([
            "sweep",
            cfg.to_str().unwrap(),
            "--param",
            "F0",
            "--from",
            "0.4",
            "--to",
            "3.6",
            "--steps",
            "9",
        ])
        .env("QCYCLE_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), csv);
}

#[test]
fn sweep_marks_points_past_the_vacuum_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"substance":{"kind":"cavity"},"cycle":{"kind":"brayton","F1":1,"F0":0.3,"L_A":1,"L_B":2},
            "output":{"samples_per_segment":4}}"#,
    );
    let o = qcycle(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "F1",
        "--from",
        "0.35",
        "--to",
        "1.0",
        "--steps",
        "14",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for row in sweep_rows(&stdout(&o)) {
        let f1: f64 = row[0].parse().unwrap();
        if 2.0 * f1 <= 1.0 {
            assert_eq!(row[3], "4", "{row:?}");
            assert!(row[1].is_empty());
        } else {
            assert_eq!(row[3], "0", "{row:?}");
        }
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CAVITY_BRAYTON);
    let run: Value =
        serde_json::from_str(&stdout(&qcycle(&["run", cfg.to_str().unwrap()]))).unwrap();
    let o = qcycle(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--param",
        "F0",
        "--from",
        "1",
        "--to",
        "1",
        "--steps",
        "1",
    ]);
    let rows = sweep_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let numeric: f64 = rows[0][1].parse().unwrap();
    assert_eq!(numeric, run["eta_numeric"].as_f64().unwrap());
}

#[test]
fn sweep_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", CAVITY_BRAYTON);
    let c = cfg.to_str().unwrap();
    for args in [
        vec![
            "sweep", c, "--param", "r_C", "--from", "0.1", "--to", "0.2", "--steps", "3",
        ],
        vec![
            "sweep", c, "--param", "F0", "--from", "2", "--to", "1", "--steps", "3",
        ],
        vec![
            "sweep", c, "--param", "F0", "--from", "1", "--to", "2", "--steps", "0",
        ],
    ] {
        assert_eq!(qcycle(&args).status.code(), Some(2), "{args:?}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_qcycle"))
        .args([
            "sweep", c, "--param", "F0", "--from", "1", "--to", "2", "--steps", "2",
        ])
        .env("QCYCLE_NUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
