use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const ROUND_PAIR: &str = r#"
[surface]
metric = "round"
degree = 8

[[vortices]]
lat = 30.0
lon = 0.0
strength = 1.0

[[vortices]]
lat = -10.0
lon = 120.0
strength = 0.5

[integrator]
t_end = 2.0
tol = 1e-10
sample_interval = 0.25
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_surfvortex"));
    c.env_remove("SURFVORTEX_OUTPUT_ROOT").env("RUST_LOG", "error");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin().args(args).arg(config).arg("--output-dir").arg(out).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Header and numeric rows; panics unless every row has the header's width.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .inspect(|r| assert_eq!(r.len(), header.len()))
        .collect();
    (header, rows)
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("JSON error record on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn round_pair_simulation_writes_valid_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "pair.toml", ROUND_PAIR);
    let out_dir = tmp.path().join("out");
    let out = run(&["simulate"], &cfg, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (header, rows) = read_csv(&out_dir.join("trajectory.csv"));
    assert_eq!(header, ["t", "x1", "y1", "z1", "x2", "y2", "z2"]);
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows.last().unwrap()[0], 2.0);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    for r in &rows {
        for k in 0..2 {
            let n = (r[1 + 3 * k].powi(2) + r[2 + 3 * k].powi(2) + r[3 + 3 * k].powi(2)).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    let d = json(&out_dir.join("diagnostics.json"));
    assert_eq!(d["n_vortices"], 2);
    assert_eq!(d["energy_contract_ok"], true);
    assert!(d["max_rel_dh"].as_f64().unwrap() < 1e-8);
    assert!(d["max_momentum_drift"].as_f64().unwrap() < 1e-8);
    assert_eq!(d["series"].as_array().unwrap().len(), rows.len());
    assert_eq!(d["momentum_initial"].as_array().unwrap().len(), 3);

    let report = json(&out_dir.join("run_report.json"));
    assert_eq!(report["command"], "simulate");
    let files = report["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        assert!(out_dir.join(f.as_str().unwrap()).is_file(), "{f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let text = format!(
        "seed = 42\n{}\n[random_vortices]\ncount = 3\nstrength = [-1.0, 2.0]\n",
        ROUND_PAIR.replace("metric = \"round\"", "metric = \"spheroid:1.0,0.8\"")
    );
    let cfg = write_config(tmp.path(), "random.toml", &text);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run(&["run"], &cfg, &a).status.success());
    assert!(run(&["run"], &cfg, &b).status.success());
    for f in ["trajectory.csv", "diagnostics.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let (header, _) = read_csv(&a.join("trajectory.csv"));
    assert_eq!(header.len(), 1 + 3 * 5);
}

#[test]
fn negative_factor_table_is_a_config_error_naming_the_node() {
    let tmp = TempDir::new().unwrap();
    // h = 0.5 + z, negative around the south pole
    let y00 = (4.0 * std::f64::consts::PI).sqrt();
    let y10 = (4.0 * std::f64::consts::PI / 3.0).sqrt();
    fs::write(tmp.path().join("bad.csv"), format!("l,m,h\n0,0,{}\n1,0,{}\n", 0.5 * y00, y10)).unwrap();
    let text = ROUND_PAIR.replace("metric = \"round\"", "metric = \"sh-table:bad.csv\"");
    let cfg = write_config(tmp.path(), "bad.toml", &text);
    let out = run(&["simulate"], &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["kind"], "config");
    assert_eq!(rec["exit_code"], 2);
    assert!(rec["message"].as_str().unwrap().contains("node"), "{rec}");
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "typo.toml", &ROUND_PAIR.replace("t_end", "t_final"));
    let out = run(&["simulate"], &cfg, &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_record(&out)["message"].as_str().unwrap().contains("t_final"));
}

#[test]
fn runtime_abort_exits_3_and_leaves_error_record() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{ROUND_PAIR}max_steps = 3\n");
    let cfg = write_config(tmp.path(), "budget.toml", &text);
    let out_dir = tmp.path().join("out");
    let out = run(&["simulate"], &cfg, &out_dir);
    assert_eq!(out.status.code(), Some(3));
    let rec = json(&out_dir.join("error.json"));
    assert_eq!(rec["exit_code"], 3);
    assert_eq!(rec, stderr_record(&out));
}

#[test]
fn validate_quick_passes() {
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn validate_reports_a_corrupted_robin_constant() {
    let out = bin().args(["validate", "--corrupt-robin", "0.01"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let rec = stderr_record(&out);
    assert_eq!(rec["kind"], "validation");
    assert!(rec["message"].as_str().unwrap().to_lowercase().contains("robin"), "{rec}");
}

#[test]
fn dipole_test_writes_runs_and_order() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[surface]
metric = "spheroid:1.0,0.7"
degree = 24
[integrator]
t_end = 1.0
tol = 1e-11
sample_interval = 0.1
[experiment]
kind = "dipole"
lat = 20.0
lon = 0.0
heading = 45.0
epsilons = [0.02, 0.01]
samples = 20
"#;
    let cfg = write_config(tmp.path(), "dipole.toml", text);
    let out_dir = tmp.path().join("out");
    let out = run(&["run"], &cfg, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&out_dir.join("dipole_runs.csv"));
    assert_eq!(header[0], "epsilon");
    assert_eq!(rows.len(), 2);
    assert!(rows[1][3] < rows[0][3]);
    let (_, track) = read_csv(&out_dir.join("dipole_tracks.csv"));
    assert_eq!(track.len(), 2 * 21);
    let summary = json(&out_dir.join("dipole.json"));
    let order = summary["fitted_order"].as_f64().unwrap();
    assert!(order > 1.5 && order < 2.5, "{order}");
}

#[test]
fn poincare_writes_crossings_on_the_section() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[surface]
metric = "spheroid:1.0,0.8"
degree = 24
[integrator]
t_end = 40.0
tol = 1e-10
sample_interval = 1.0
[experiment]
kind = "poincare"
level = 0.0
crossing = "up"
epsilon = 0.1
heading = 30.0
lon = 0.0
latitudes = [-10.0, 5.0]
"#;
    let cfg = write_config(tmp.path(), "section.toml", text);
    let out_dir = tmp.path().join("out");
    let out = run(&["poincare"], &cfg, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&out_dir.join("section.csv"));
    assert_eq!(header[..4], ["trajectory", "t", "lambda", "q"]);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[5].abs() < 1e-10));
    let summary = json(&out_dir.join("section.json"));
    assert_eq!(summary["crossings"].as_u64().unwrap() as usize, rows.len());
    assert!(summary["max_h_deviation"].as_f64().unwrap() < 1e-7);
}

#[test]
fn greens_table_output_reloads_as_a_metric() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
[surface]
metric = "ellipsoid:1.2,1.0,0.8"
degree = 24
[experiment]
kind = "greens-table"
grid = 6
"#;
    let cfg = write_config(tmp.path(), "table.toml", text);
    let out_dir = tmp.path().join("out");
    let out = run(&["greens-table"], &cfg, &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&out_dir.join("greens_table.csv"));
    assert_eq!(header, ["lat", "lon", "h", "u", "robin", "curvature"]);
    assert_eq!(rows.len(), 7 * 14);
    assert!(rows.iter().all(|r| r[2] > 0.0));
    assert!(json(&out_dir.join("greens.json"))["steiner_residual"].as_f64().unwrap() < 1e-6);

    // the exported ln h coefficients drive a second run on the same surface
    let text = format!(
        "[surface]\nmetric = \"sh-table:{}\"\ndegree = 24\n[experiment]\nkind = \"greens-table\"\ngrid = 6\n",
        out_dir.join("ln_h.csv").display()
    );
    let cfg = write_config(tmp.path(), "reload.toml", &text);
    let again = tmp.path().join("again");
    assert!(run(&["greens-table"], &cfg, &again).status.success());
    let (_, reloaded) = read_csv(&again.join("greens_table.csv"));
    for (a, b) in rows.iter().zip(&reloaded) {
        assert!((a[2] - b[2]).abs() < 1e-12 && (a[4] - b[4]).abs() < 1e-9);
    }
}

#[test]
fn output_root_variable_relocates_relative_dirs() {
    let tmp = TempDir::new().unwrap();
    let text = format!("output_dir = \"rel/run1\"\n{ROUND_PAIR}");
    let cfg = write_config(tmp.path(), "rel.toml", &text);
    let root = tmp.path().join("root");
    let out = bin()
        .arg("simulate")
        .arg(&cfg)
        .env("SURFVORTEX_OUTPUT_ROOT", &root)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.join("rel/run1/trajectory.csv").is_file());
}
