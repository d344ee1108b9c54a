use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tunnel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunnel")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn scenario(dir: &Path, extra: &str) -> String {
    let csv = dir.join("out.csv");
    let report = dir.join("report.json");
    format!(
        r#"{{ {extra},
            "output": {{"csv_path": {:?}, "report_path": {:?}}} }}"#,
        csv.to_str().unwrap(),
        report.to_str().unwrap()
    )
}

fn first_row(dir: &Path, tau_min: f64) -> Vec<String> {
    let body = scenario(
        dir,
        &format!(
            r#""model": {{"eta": 0}}, "particles": {{"N": 1, "statistics": "fermionized"}},
               "times": {{"tau_min": {tau_min}, "tau_max": 10, "points": 8}}, "method": "exact_free",
               "observables": ["nonescape"]"#
        ),
    );
    let out = tunnel(&["run", "--config", &write_config(dir, &body)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("out.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("tau,value,observable,statistics,N,method,flag"));
    lines.next().unwrap().split(',').map(str::to_string).collect()
}

#[test]
fn minimal_run_starts_near_one() {
    let dir = tempfile::tempdir().unwrap();
    // sine-transform quadrature of the half-line propagator gives 0.99812525505
    let row = first_row(dir.path(), 0.01);
    let tau: f64 = row[0].parse().unwrap();
    assert!((tau - 0.01).abs() < 1e-15);
    let v: f64 = row[1].parse().unwrap();
    assert!((v - 0.998_125_255_05).abs() < 1e-6, "{v}");
    assert_eq!(&row[2..6], &["nonescape", "fermionized", "1", "exact_free"]);
    assert_eq!(row[6], "");

    let row = first_row(dir.path(), 1e-5);
    let v: f64 = row[1].parse().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn fermion_survival_report_has_the_tenth_power() {
    let dir = tempfile::tempdir().unwrap();
    let body = scenario(
        dir.path(),
        r#""model": {"eta": 0}, "particles": {"N": 2, "statistics": "fermionized"},
           "times": {"tau_min": 100, "tau_max": 1000, "points": 12}, "method": "exact_free",
           "observables": ["survival", "nonescape"], "fit_window": [100, 1000]"#,
    );
    let config = write_config(dir.path(), &body);
    let out = tunnel(&["run", "--config", &config, "--json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let survival = &report["observables"][0];
    assert_eq!(survival["observable"], "survival");
    let e = survival["fit"]["exponent"].as_f64().unwrap();
    assert!((e + 10.0).abs() < 0.3, "{e}");
    assert_eq!(survival["series"]["exponent"], -10.0);

    // deterministic output, and the saved report matches stdout
    let csv1 = std::fs::read(dir.path().join("out.csv")).unwrap();
    let again = tunnel(&["run", "--config", &config, "--json"]);
    assert_eq!(out.stdout, again.stdout);
    assert_eq!(csv1, std::fs::read(dir.path().join("out.csv")).unwrap());
    let saved = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert_eq!(saved.trim(), String::from_utf8_lossy(&out.stdout).trim());

    // non-escape at these times has cancelled: flagged rows carry a reason and fits refuse them
    let csv = String::from_utf8(csv1).unwrap();
    let flagged: Vec<&str> = csv
        .lines()
        .filter(|l| l.contains("nonescape") && !l.ends_with(','))
        .collect();
    assert!(!flagged.is_empty());
    assert!(flagged.iter().all(|l| l.contains("cancellation")));
    let p = &report["observables"][1];
    assert!(p["fit"].is_null());
    assert!(p["fit_refused"].as_str().unwrap().contains("flagged"));

    let fit = tunnel(&[
        "fit",
        dir.path().join("out.csv").to_str().unwrap(),
        "--window",
        "100:1000",
        "--json",
    ]);
    assert_eq!(fit.status.code(), Some(3));
    let fits: Value = serde_json::from_slice(&fit.stdout).unwrap();
    let rows = fits.as_array().unwrap();
    let s = rows.iter().find(|r| r["observable"] == "survival").unwrap();
    assert!((s["fit"]["exponent"].as_f64().unwrap() - e).abs() < 1e-12);
    let n = rows.iter().find(|r| r["observable"] == "nonescape").unwrap();
    assert!(n["refused"].is_string());
}

#[test]
fn exact_free_with_a_barrier_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"model": {"eta": 1}, "particles": {"N": 1, "statistics": "bosons"},
        "times": {"tau_min": 1, "tau_max": 10, "points": 4}, "method": "exact_free",
        "observables": ["nonescape"]}"#;
    let out = tunnel(&["run", "--config", &write_config(dir.path(), body)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta = 0"));
    let out = tunnel(&["run", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pole_table() {
    let out = tunnel(&["poles", "--eta", "1000", "--count", "4", "--json"]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let k1 = rows[0]["re_k"].as_f64().unwrap();
    let want = std::f64::consts::PI * (1.0 - 1.0 / 1001.0);
    assert!((k1 / want - 1.0).abs() < 1e-5);
    assert!(rows
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["residual"].as_f64().unwrap() < 1e-12));

    let g = |eta: &str| {
        let o = tunnel(&["poles", "--eta", eta, "--count", "1", "--json"]);
        serde_json::from_slice::<Value>(&o.stdout).unwrap()[0]["gamma"]
            .as_f64()
            .unwrap()
    };
    assert!(g("100") < g("10"));
    let text = tunnel(&["poles", "--eta", "10", "--count", "3"]);
    assert_eq!(String::from_utf8_lossy(&text.stdout).lines().count(), 4);
    assert_eq!(tunnel(&["poles", "--eta", "0"]).status.code(), Some(2));
}

#[test]
fn asymptotics_table() {
    let out = tunnel(&["asymptotics", "-n", "1", "--json"]);
    assert!(out.status.success());
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let first = &rows[0];
    assert_eq!(first["observable"], "nonescape");
    assert_eq!(first["closed_form_exponent"], -3.0);
    assert_eq!(first["series_exponent"], -3.0);
    let c = 4.0 / (3.0 * std::f64::consts::PI.powi(3));
    assert!((first["series_coefficient"].as_f64().unwrap() / c - 1.0).abs() < 1e-12);

    let out = tunnel(&["asymptotics", "-n", "3", "--json"]);
    let rows: Value = serde_json::from_slice(&out.stdout).unwrap();
    let f = rows
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["observable"] == "nonescape" && r["statistics"] == "fermionized")
        .unwrap();
    assert_eq!(
        (f["closed_form_exponent"].as_f64(), f["series_exponent"].as_f64()),
        (Some(-21.0), Some(-21.0))
    );

    let text = String::from_utf8(tunnel(&["asymptotics", "-n", "2"]).stdout).unwrap();
    let eb = text
        .lines()
        .find(|l| l.starts_with("nonescape") && l.contains("excited_bosons"))
        .unwrap();
    assert!(eb.contains("-6") && eb.contains('—'));
    assert_eq!(tunnel(&["asymptotics", "-n", "5"]).status.code(), Some(2));
}

#[test]
fn verify_fails_under_a_tight_tolerance() {
    let out = tunnel(&["verify", "--only", "2,4", "--tolerance-scale", "1e-8"]);
    assert!(!out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[FAIL]  2"));
    assert!(text
        .lines()
        .all(|l| !l.starts_with('[') || l.contains("budget") || l.contains(" s")));

    let out = tunnel(&["verify", "--only", "4", "--json"]);
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r[0]["passed"], true);
    assert!(r[0]["runtime_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn shipped_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = tunnel_cli::ScenarioConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 2);
}
