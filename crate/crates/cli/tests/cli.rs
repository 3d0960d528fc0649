use std::path::Path;
use std::process::{Command, Output};

fn oscfree(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oscfree"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sweep_writes_all_four_artefacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(
        &[
            "sweep",
            "--equation",
            "heat",
            "--scheme",
            "ftcs",
            "--bc",
            "dirichlet",
            "--resolution",
            "8",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for ext in ["csv", "ppm", "svg", "json"] {
        let p = dir.path().join("out").join(format!("heat-ftcs-dirichlet.{ext}"));
        assert!(p.is_file(), "missing {}", p.display());
    }
    let csv = std::fs::read_to_string(dir.path().join("out/heat-ftcs-dirichlet.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("dx,dt,code,min_re_lambda,max_re_lambda,rho"));
    assert_eq!(csv.lines().count(), 1 + 64);
    assert!(stdout(&o).contains("C1:"));
}

#[test]
fn emit_and_ranges_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(
        &[
            "sweep",
            "--dx-range",
            "0.5,1",
            "--dt-range",
            "0.5,1",
            "--resolution",
            "2",
            "--emit",
            "csv,image",
            "--out",
            "maps",
            "--collapse-uo",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("maps"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["heat-ftcs-dirichlet.csv", "heat-ftcs-dirichlet.ppm"]);
    let csv = std::fs::read_to_string(dir.path().join("maps/heat-ftcs-dirichlet.csv")).unwrap();
    let codes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    // (Δx, Δt) = (1, 0.5) sits exactly on r = ½ and stays bounded
    assert_eq!(codes, ["U", "U", "OFS", "U"]);
}

#[test]
fn solve_prints_trace_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(
        &[
            "solve",
            "--equation",
            "fisher",
            "--scheme",
            "btcs-frozen",
            "--dx",
            "0.1",
            "--dt",
            "0.01",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,time,inf_norm,l2_norm,flipped_nodes"));
    // 500 steps plus the initial row
    let rows = lines.clone().take_while(|l| !l.starts_with('{')).count();
    assert_eq!(rows, 501);
    let json_start = text.find('{').unwrap();
    let report: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
    assert_eq!(report["flags"]["wave_limitation"], true);
    assert_eq!(report["flags"]["frozen_bound"], 0.0);
    assert!(report["code"].is_string());
}

#[test]
fn spectrum_reports_bounds_and_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(
        &["spectrum", "--length", "1", "--dx", "0.25", "--dt", "0.025", "--dense"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["unknowns"], 3);
    // r = 0.4: 1 - 1.6·sin²(iπ/8)
    let eig = v["spectrum"]["eigenvalues"].as_array().unwrap();
    let want = [1.0 - 1.6 * (std::f64::consts::PI / 8.0).sin().powi(2), 0.2];
    assert!((eig[0][0].as_f64().unwrap() - want[0]).abs() < 1e-12);
    assert!((eig[1][0].as_f64().unwrap() - want[1]).abs() < 1e-12);
    assert_eq!(v["bounds"][0]["curve"], "vn-stability");
    assert!((v["bounds"][0]["bound"]["dt"].as_f64().unwrap() - 0.03125).abs() < 1e-8);
}

#[test]
fn audit_reads_a_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(
        &["sweep", "--scheme", "btcs", "--resolution", "6", "--emit", "csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let o = oscfree(
        &[
            "audit",
            "--scheme",
            "btcs",
            "--csv",
            "out/heat-btcs-dirichlet.csv",
            "--out",
            "audit.json",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["resolution"], 6);
    let audits = v["audits"].as_array().unwrap();
    assert_eq!(audits.len(), 4);
    assert_eq!(audits[1]["conjecture"], "C2");
    assert_eq!(audits[1]["counterexamples_total"], 0);
    assert!(audits[3]["note"].is_string());
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"equation": "linear-rd", "resolution": 3, "emit": ["csv"], "output_dir": "fromfile"}"#,
    )
    .unwrap();
    let o = oscfree(&["sweep", "--config", "cfg.json", "--resolution", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fromfile/linear-rd-ftcs-dirichlet.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn bad_configuration_exits_one_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(&["sweep", "--scheme", "bogus"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = oscfree(&["sweep", "--equation", "fisher", "--scheme", "cn"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    std::fs::write(dir.path().join("bad.json"), r#"{"resolutoin": 4}"#).unwrap();
    let o = oscfree(&["sweep", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn io_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "x").unwrap();
    let o = oscfree(&["sweep", "--resolution", "2", "--out", "blocker/sub"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = oscfree(&["audit", "--csv", "missing.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = oscfree(&["sweep", "--config", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = oscfree(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sweep"));
}
