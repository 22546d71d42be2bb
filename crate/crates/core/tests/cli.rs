//! The `mcf-qkd` binary: exit codes, overrides, the output-directory
//! environment variable and the documented CSV contents.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mcf-qkd");

fn config(name: &str) -> String {
    format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn mcf(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("MCF_QKD_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|x| x.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn threshold_config_gives_one_ninth() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mcf(&["run", &config("threshold")], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&tmp.path().join("threshold.csv"));
    assert_eq!(rows[0], ["sigma_hz", "kind", "s_star", "s_star_db", "normalized"]);
    assert_eq!(rows[1][1], "Crossing");
    assert_eq!(rows[1][2], "1.11111111e-1");
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("run-meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "threshold");
    assert_eq!(meta["config"]["parameters"]["scene"]["params"]["visibility_threshold"], 0.8);
}

#[test]
fn psr_sweep_flags_a_no_effect_window() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mcf(&["run", &config("psr-sweep"), "--plot"], tmp.path());
    assert!(out.status.success());
    let rows = csv(&tmp.path().join("psr-sweep.csv"));
    let kinds: Vec<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert!(kinds.contains(&"NoEffect"));
    let first = kinds.iter().position(|k| *k == "NoEffect").unwrap();
    let last = kinds.iter().rposition(|k| *k == "NoEffect").unwrap();
    assert!(kinds[first..=last].iter().all(|k| *k == "NoEffect"));
    let no_effect = &rows[1 + first];
    assert_eq!(&no_effect[2..5], ["", "", ""]);
    assert!(tmp.path().join("psr-sweep.svg").exists());
}

#[test]
fn table_widths_give_four_decreasing_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "t.json",
        r#"{"command": "trench-study", "parameters": {"widths_um": [0, 1, 3, 6], "trench_dn": [0.01]}}"#,
    );
    let out = mcf(&["run", &cfg], &tmp.path().join("out"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&tmp.path().join("out/trench-study.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(
        rows[0],
        ["variant", "trench_width_um", "dn", "xt_core0_db", "xt_core1_db", "xt_core2_db", "xt_core3_db", "absorbed_fraction"]
    );
    let xt: Vec<f64> = rows[1..].iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(xt.windows(2).all(|w| w[1] < w[0]), "{xt:?}");
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{"command": "threshold", "parameters": {"scene": {"sources": [], "sigma": 3}}}"#,
    );
    let out = mcf(&["run", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma") && err.contains("parameters.scene"), "{err}");
}

#[test]
fn validate_reports_without_running() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "neg.json",
        r#"{"command": "snr-curve", "parameters": {"scene": {"sources": [{"power_rel": 1,
            "detuning": {"v_omega": -1}}]}, "sigma_hz": [-1e9]}}"#,
    );
    let out = Command::new(BIN).args(["validate", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("parameters.sigma_hz[0]"));

    let cfg = write(tmp.path(), "hot.json", r#"{"command": "bpm-crosstalk", "parameters": {"fiber": {"core_dn": 0.05}}}"#);
    let out = Command::new(BIN).args(["validate", &cfg]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("warning: parameters.fiber.core_dn") && text.contains("paraxial"), "{text}");
}

#[test]
fn monte_carlo_needs_a_seed_from_file_or_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "v.json",
        r#"{"command": "visibility", "parameters": {"scenes": [{}], "sigma_hz": [0, 1e9], "n_samples": 100}}"#,
    );
    let out = mcf(&["run", &cfg], &tmp.path().join("a"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = mcf(&["run", &cfg, "--seed", "4"], &tmp.path().join("a"));
    assert!(out.status.success());
    let rows = csv(&tmp.path().join("a/visibility.csv"));
    assert_eq!(rows[0], ["scene_id", "sigma_hz", "v_mean", "v_stderr", "qber"]);
    assert_eq!(rows[1][0], "scene0");
    assert_eq!(rows.len(), 3);
}

#[test]
fn seed_flag_overrides_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let noisy = r#"{"command": "visibility", "seed": 1, "parameters": {"scenes": [{"sources":
        [{"power_rel": 0.01, "detuning": {"v_omega": -1}}]}], "sigma_hz": [1e9], "n_samples": 1000}}"#;
    let cfg = write(tmp.path(), "v.json", noisy);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    assert!(mcf(&["run", &cfg], &a).status.success());
    assert!(mcf(&["run", &cfg, "--seed", "1"], &b).status.success());
    assert!(mcf(&["run", &cfg, "--seed", "2"], &c).status.success());
    let read = |d: &Path| std::fs::read(d.join("visibility.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(c.join("run-meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 2);
}

#[test]
fn output_dir_falls_back_to_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let env_dir = tmp.path().join("from-env");
    let cfg = write(
        tmp.path(),
        "t.json",
        r#"{"command": "threshold", "parameters": {"scene": {"sources": [{"power_rel": 1, "detuning": {"v_omega": 0}}]}}}"#,
    );
    let out = Command::new(BIN)
        .args(["run", &cfg])
        .env("MCF_QKD_OUTPUT_DIR", &env_dir)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("threshold.csv").exists());
    assert!(env_dir.join("run-meta.json").exists());
}

#[test]
fn bpm_exports_images() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "b.json",
        r#"{"command": "bpm-crosstalk", "parameters": {"grid": {"nx": 192, "ny": 192, "dx": 0.875, "dy": 0.875,
            "dz": 5.0}, "distance_um": 500, "exports": {"index": true, "intensity": true}}}"#,
    );
    let out = mcf(&["run", &cfg], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["index.pgm", "intensity.pgm"] {
        let bytes = std::fs::read(tmp.path().join(f)).unwrap();
        assert!(bytes.starts_with(b"P5\n192 192\n255\n"));
        assert_eq!(bytes.len(), 15 + 192 * 192);
    }
    let grid = std::fs::read_to_string(tmp.path().join("intensity.csv")).unwrap();
    assert_eq!(grid.lines().count(), 192);
    let rows = csv(&tmp.path().join("bpm-crosstalk.csv"));
    assert_eq!(rows[1][0], "no trench");
    assert_eq!(rows[1][3], "");
}
