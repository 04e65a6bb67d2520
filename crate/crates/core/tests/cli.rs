use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bro_mimo::asymptotics::{big_f, q_function};

const BASE: &str = r#"{
  "n": 24, "beta": 1.5, "tau": 2.5, "tau_p": 1, "rho_db": 10, "alpha": 0.5,
  "r": 0.2, "seed": 3, "trials": 4, "decoders": ["BRO", "LS"]
}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bro-mimo"));
    cmd.env("BRO_MIMO_THREADS", "2");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn predict_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let text = stdout(&run(&["predict", "--config", cfg.to_str().unwrap()]));
    let golden =
        std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/predict_golden.csv")).unwrap();
    assert_eq!(text, golden);
}

#[test]
fn simulate_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let args = ["simulate", "--config", cfg.to_str().unwrap()];
    let first = stdout(&run(&args));
    assert_eq!(first, stdout(&run(&args)));
    let (header, rows) = parse_csv(&first);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][column(&header, "decoder")], "BRO");
    assert_eq!(rows[1][column(&header, "decoder")], "LS");
    assert_eq!(rows[0][column(&header, "m")], "36");
}

#[test]
fn rows_are_self_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let (header, rows) = parse_csv(&stdout(&run(&["predict", "--config", cfg.to_str().unwrap()])));
    let get = |name: &str| rows[0][column(&header, name)].parse::<f64>().unwrap();
    let mu = get("mu_star");
    assert!((get("mse_theory") - big_f(mu)).abs() <= 1e-11 * big_f(mu));
    assert!((get("ber_theory") - q_function(mu / 2.0)).abs() <= 1e-11 * q_function(mu / 2.0));
    assert_eq!(get("rho_db"), 10.0);
}

#[test]
fn json_output_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let text = stdout(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["decoder"], "LS");
    assert_eq!(rows[0]["n_trials"], 4);
    assert!(rows[0]["mean_mse"].is_f64());
}

#[test]
fn manifest_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let reordered = r#"{"decoders": ["BRO", "LS"], "trials": 4, "seed": 3, "r": 0.2, "alpha": 0.5,
        "rho_db": 10, "tau_p": 1, "tau": 2.5, "beta": 1.5, "n": 24}"#;
    let mut hashes = Vec::new();
    for (name, text) in [("a.json", BASE), ("b.json", reordered)] {
        let cfg = write_config(dir.path(), name, text);
        let out = dir.path().join(format!("{name}.csv"));
        let status = run(&["predict", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(status.status.success());
        assert!(status.stdout.is_empty());
        let manifest_file = dir.path().join(format!("{name}.csv.manifest.json"));
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest_file).unwrap()).unwrap();
        assert_eq!(manifest["command"], "predict");
        assert_eq!(manifest["schema"], "bro-mimo/predict/v1");
        assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
        assert_eq!(manifest["output_paths"][0], out.to_str().unwrap());
        assert!(manifest["started_at"].as_str().unwrap().ends_with('Z'));
        hashes.push(manifest["config_hash"].as_str().unwrap().to_string());
    }
    assert_eq!(hashes[0], hashes[1]);
    assert_eq!(hashes[0].len(), 64);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["predict", "--config", missing.to_str().unwrap()]).status.code(), Some(6));

    let bad = write_config(dir.path(), "bad.json", r#"{"n": 24, "beta": "#);
    assert_eq!(run(&["predict", "--config", bad.to_str().unwrap()]).status.code(), Some(3));

    let unknown = write_config(dir.path(), "unknown.json", &BASE.replace("\"seed\"", "\"sead\""));
    assert_eq!(run(&["predict", "--config", unknown.to_str().unwrap()]).status.code(), Some(3));

    let invalid = write_config(
        dir.path(),
        "invalid.json",
        r#"{"n": 24, "beta": 0.4, "tau": 1, "tau_p": 1, "rho_db": 10, "alpha": 1.5, "r": 0.2}"#,
    );
    let out = run(&["predict", "--config", invalid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["beta", "tau", "alpha"] {
        assert!(err.contains(key), "{err}");
    }

    let empty = write_config(dir.path(), "empty.json", &BASE.replace(r#"["BRO", "LS"]"#, "[]"));
    assert_eq!(run(&["simulate", "--config", empty.to_str().unwrap()]).status.code(), Some(4));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["predict"]).status.code(), Some(2));
    let good = write_config(dir.path(), "good.json", BASE);
    let sweep = run(&["sweep", "--config", good.to_str().unwrap(), "--param", "gamma", "--values", "1"]);
    assert_eq!(sweep.status.code(), Some(3));
}

#[test]
fn perfect_csi_flag_lowers_the_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let mse = |extra: &[&str]| {
        let mut args = vec!["predict", "--config", cfg.to_str().unwrap()];
        args.extend_from_slice(extra);
        let (header, rows) = parse_csv(&stdout(&run(&args)));
        rows[0][column(&header, "mse_theory")].parse::<f64>().unwrap()
    };
    assert!(mse(&["--perfect-csi"]) < mse(&[]));
}

#[test]
fn power_opt_reports_curve_and_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    for objective in ["mse", "ber"] {
        let text =
            stdout(&run(&["power-opt", "--config", cfg.to_str().unwrap(), "--objective", objective, "--grid", "21"]));
        let (header, rows) = parse_csv(&text);
        assert_eq!(rows.len(), 22);
        let kind = column(&header, "kind");
        assert!(rows[..21].iter().all(|r| r[kind] == "curve"));
        assert_eq!(rows[21][kind], "optimum");
        let metric = column(&header, objective);
        let alpha = column(&header, "alpha");
        let best_curve = rows[..21].iter().map(|r| r[metric].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
        let optimum: f64 = rows[21][metric].parse().unwrap();
        assert!(optimum <= best_curve * (1.0 + 1e-9));
        let a: f64 = rows[21][alpha].parse().unwrap();
        assert!(a > 0.0 && a < 1.0);
        assert_eq!(rows[0][column(&header, "alpha_star_mse")], "NA");
    }
}

#[test]
fn beta_sweep_has_one_row_per_point_and_decoder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &BASE.replace("\"trials\": 4", "\"trials\": 2"));
    let values: Vec<String> = (0..15).map(|k| format!("{:.1}", 0.6 + 0.1 * k as f64)).collect();
    let text =
        stdout(&run(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "beta", "--values", &values.join(",")]));
    let (header, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 30);
    let m = column(&header, "m");
    assert_eq!(rows[0][m], "14");
    assert_eq!(rows[29][m], "48");
    assert!(rows.iter().all(|r| r[column(&header, "error")].is_empty()));
}

#[test]
fn failed_sweep_points_are_kept() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", BASE);
    let out = run(&["sweep", "--config", cfg.to_str().unwrap(), "--param", "alpha", "--values", "0.5,-0.2"]);
    assert_eq!(out.status.code(), Some(4));
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2][column(&header, "mean_mse")], "NA");
    assert!(rows[2][column(&header, "error")].contains("alpha"));
}
