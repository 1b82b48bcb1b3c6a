use std::path::PathBuf;
use std::process::{Command, Output};

use spincorr::cli::config::Config;
use spincorr::cli::csv::{data_section, parse_tables, Table};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_spincorr");

struct Run {
    dir: TempDir,
}

impl Run {
    fn new() -> Self {
        Run { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn exec(&self, command: &str, json: &str, extra: &[&str]) -> (Output, PathBuf) {
        let cfg = self.path(&format!("{command}.json"));
        std::fs::write(&cfg, json).unwrap();
        let out = self.path(&format!("{command}-{}.csv", extra.join("_")));
        let output = Command::new(BIN)
            .args([command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .args(extra)
            .output()
            .unwrap();
        (output, out)
    }

    fn ok(&self, command: &str, json: &str, extra: &[&str]) -> String {
        let (output, out) = self.exec(command, json, extra);
        assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
        std::fs::read_to_string(out).unwrap()
    }
}

fn table<'a>(tables: &'a [Table], name: &str) -> &'a Table {
    tables.iter().find(|t| t.name == name).unwrap_or_else(|| panic!("no table {name}"))
}

fn column(t: &Table, name: &str) -> Vec<String> {
    let i = t.columns.iter().position(|c| c == name).unwrap();
    t.rows.iter().map(|r| r[i].clone()).collect()
}

fn numbers(t: &Table, name: &str) -> Vec<f64> {
    column(t, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn header(text: &str, key: &str) -> String {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().to_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let run = Run::new();
    assert_eq!(code(&run.exec("simulate", r#"{"run": {"trials": 1000}}"#, &[]).0), 0);
    assert_eq!(code(&run.exec("simulate", r#"{"run": {"trails": 1000}}"#, &[]).0), 1);
    assert_eq!(code(&run.exec("simulate", "{not json", &[]).0), 1);
    assert_eq!(code(&run.exec("simulate", r#"{"detectors": {"efficiency": 1.5}}"#, &[]).0), 1);
    assert_eq!(code(&run.exec("simulate", "{}", &["--threads", "0"]).0), 1);
    assert_eq!(code(&run.exec("simulate", r#"{"detectors": {"efficiency": 0}, "run": {"trials": 100}}"#, &[]).0), 3);

    let missing = Command::new(BIN)
        .args(["analytic", "--config", run.path("absent.json").to_str().unwrap(), "--out", run.path("x.csv").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 1);
    assert_eq!(code(&Command::new(BIN).arg("frobnicate").output().unwrap()), 1);
    assert_eq!(code(&Command::new(BIN).arg("--help").output().unwrap()), 0);
}

#[test]
fn selftest_passes() {
    let output = Command::new(BIN).args(["selftest", "--threads", "2"]).output().unwrap();
    assert_eq!(code(&output), 0);
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.lines().count() >= 6);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn analytic_grid_values() {
    let run = Run::new();
    let text = run.ok(
        "analytic",
        r#"{"run": {"analytic": [
            {"formula": "prob4_factorized", "grid": {"theta1p": [0], "theta2p": [0, 45, 90], "theta1": [0], "theta2": [90]}},
            {"formula": "visibility_geometry", "grid": {"width_over_spacing": [0, 0.5, 1]}},
            {"formula": "prob2_opposite", "grid": {"theta10": [0], "theta20": [90], "theta1": [0], "theta2": [90]}}
        ]}}"#,
        &[],
    );
    let tables = parse_tables(&text).unwrap();
    let t = table(&tables, "analytic");
    assert_eq!(column(t, "formula"), [
        "prob4_factorized",
        "prob4_factorized",
        "prob4_factorized",
        "visibility_geometry",
        "visibility_geometry",
        "visibility_geometry",
        "prob2_opposite"
    ]);
    let want = [0.0, 1.0 / 32.0, 1.0 / 16.0, 1.0, 0.405_284_734_569_351, 0.0, 0.25];
    for (got, want) in numbers(t, "value").iter().zip(want) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn empty_grid_writes_header_only() {
    let run = Run::new();
    let text = run.ok("analytic", r#"{"run": {"analytic": [{"formula": "prob4_triplet", "grid": {}}]}}"#, &[]);
    let t = &parse_tables(&text).unwrap()[0];
    assert!(t.rows.is_empty());
    assert_eq!(t.columns.first().map(String::as_str), Some("formula"));
    assert_eq!(data_section(&text).lines().count(), 1);
}

#[test]
fn same_seed_same_counts_and_threads_do_not_matter() {
    let run = Run::new();
    let json = r#"{"detectors": {"efficiency": 0.95}, "angles": {"prime": [0, 30]}, "run": {"trials": 50000, "seed": 9}}"#;
    let a = run.ok("simulate", json, &["--threads", "1"]);
    let b = run.ok("simulate", json, &["--threads", "3"]);
    assert_eq!(data_section(&a), data_section(&b));
    let c = run.ok("simulate", json, &["--seed", "10"]);
    assert_ne!(data_section(&a), data_section(&c));
    assert_eq!(header(&c, "seed"), "10");
}

#[test]
fn gate_rate_scales_with_efficiency_squared() {
    let run = Run::new();
    let eta: f64 = 0.9;
    let text = run.ok("simulate", r#"{"detectors": {"efficiency": 0.9}, "run": {"trials": 400000, "seed": 1}}"#, &[]);
    let tables = parse_tables(&text).unwrap();
    let rates = table(&tables, "rates");
    let i = column(rates, "quantity").iter().position(|q| q == "gate_open_rate").unwrap();
    let rate: f64 = rates.rows[i][2].parse().unwrap();
    let se: f64 = rates.rows[i][3].parse().unwrap();
    assert!((rate - eta * eta / 4.0).abs() <= 5.0 * se, "{rate} ± {se}");
    assert_eq!(table(&tables, "counts").rows.len(), 16);
    assert_eq!(table(&tables, "estimates").rows.len(), 4);
}

#[test]
fn scan_reproduces_thresholds() {
    let run = Run::new();
    let text = run.ok(
        "scan",
        r#"{"run": {"scan": {"visibilities": [1, 0.87], "r_values": [1, 0.31], "grid_step_deg": 1}}}"#,
        &[],
    );
    let tables = parse_tables(&text).unwrap();
    let t = table(&tables, "thresholds");
    let conventions = column(t, "convention");
    let closed = numbers(t, "closed_form");
    let fringe: Vec<f64> = closed.iter().zip(&conventions).filter(|(_, c)| *c == "fringe").map(|(x, _)| *x).collect();
    assert!((fringe[0] - 0.828_427).abs() < 1e-6);
    assert!((fringe[1] - 0.896_714).abs() < 1e-6);
    for (eta, c) in column(t, "eta_min").iter().zip(&closed) {
        assert!((eta.parse::<f64>().unwrap() - c).abs() < 1e-5);
    }
    let e = table(&tables, "eberhard");
    assert!((numbers(e, "transmittance_x")[1] - 0.912_326).abs() < 1e-6);
    assert!((numbers(e, "eta_min")[0] - 0.828_427).abs() < 1e-5);
}

#[test]
fn header_echoes_the_normalized_config() {
    let run = Run::new();
    let text = run.ok("bell", r#"{"run": {"bell": {"grid_step_deg": 2}}}"#, &["--seed", "4"]);
    let echoed = header(&text, "config");
    let config = Config::from_json(&echoed).unwrap();
    assert_eq!(config.sha256(), header(&text, "config_sha256"));
    assert_eq!(config.run.seed, 4);
    assert_eq!(header(&text, "command"), "bell");
    assert_eq!(header(&text, "spincorr"), env!("CARGO_PKG_VERSION"));
    let s = numbers(table(&parse_tables(&text).unwrap(), "bell"), "s")[0];
    assert!((s - 0.207_106_78).abs() < 1e-6);
}
