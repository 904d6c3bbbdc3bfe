use std::path::Path;
use std::process::{Command, Output};

use gravchan_cli::RunConfig;
use serde_json::Value;

fn gravchan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravchan"))
        .args(args)
        .current_dir(dir)
        .env_remove("GRAVCHAN_THREADS")
        .output()
        .expect("spawn gravchan")
}

fn with_config(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.json"), config).unwrap();
    dir
}

fn summary(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn exit_code(dir: &Path, args: &[&str]) -> i32 {
    gravchan(dir, args).status.code().unwrap()
}

#[test]
fn fringe_three_points() {
    let dir = with_config(r#"{"scan": {"delta_phi": [0, 1.5707963267948966, 3.141592653589793]}}"#);
    let out = gravchan(dir.path(), &["fringe", "--config", "run.json", "--out", "f.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("f.csv"));
    assert_eq!(
        header,
        ["delta_phi_rad", "p_direct", "p_channel_joint_g", "p_channel_closed_form", "abs_error"]
    );
    let expect = [(1.0, 0.5), (0.5, 0.25), (0.0, 0.0)];
    for (row, (direct, channel)) in rows.iter().zip(expect) {
        let v: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - direct).abs() < 1e-12);
        assert!((v[2] - channel).abs() < 1e-12);
        assert!(v[4] < 1e-12);
        assert!(row.iter().all(|c| c.contains('e')), "{row:?}");
    }
    let s = summary(dir.path(), "fringe_summary.json");
    assert_eq!(s["command"], "fringe");
    assert_eq!(s["result"]["points"], 3);
    assert_eq!(s["result"]["csv"], "f.csv");
}

#[test]
fn fringe_without_grid_uses_gravity_phase() {
    let dir = with_config(r#"{"interferometer": {"k": 1.0, "t": 1.0, "g0": 2.0}}"#);
    assert_eq!(exit_code(dir.path(), &["fringe", "--config", "run.json"]), 0);
    let (_, rows) = read_csv(&dir.path().join("fringe.csv"));
    assert_eq!(rows.len(), 1);
    let d: f64 = rows[0][0].parse().unwrap();
    assert_eq!(d, 2.0);
    let direct: f64 = rows[0][1].parse().unwrap();
    assert!((direct - (1.0 + 2f64.cos()) / 2.0).abs() < 1e-12);
}

#[test]
fn fringe_cat_channel_remote_override() {
    let dir = with_config(r#"{"channel": {"kind": "cat", "atoms": 4}, "scan": {"points": 8}}"#);
    assert_eq!(exit_code(dir.path(), &["fringe", "--config", "run.json", "--remote-atom", "2"]), 0);
    let s = summary(dir.path(), "fringe_summary.json");
    assert_eq!(s["config"]["remote_atom"], 2);
    assert!(s["result"]["max_abs_error"].as_f64().unwrap() < 1e-12);
    assert_eq!(exit_code(dir.path(), &["fringe", "--config", "run.json", "--remote-atom", "3"]), 2);
}

#[test]
fn validation_failures_exit_2() {
    let cases = [
        ("fringe", r#"{"scan": {"delta_phi": []}}"#),
        ("fringe", r#"{"unknown": 1}"#),
        ("fringe", "not json"),
        ("noise", r#"{"noise": {"n_runs": 1}}"#),
        ("noise", r#"{"noise": {"delta_phi_mean": 0}}"#),
        ("optimize", r#"{"optimize": {"tolerance": 0}}"#),
        ("prepare", r#"{"channel": {"kind": "general", "a": 0.6, "b": 0.9}}"#),
        ("prepare", r#"{"prepare": {"omega_t2": 1.0}}"#),
    ];
    for (cmd, config) in cases {
        let dir = with_config(config);
        let out = gravchan(dir.path(), &[cmd, "--config", "run.json"]);
        assert_eq!(out.status.code(), Some(2), "{cmd} {config}");
        assert!(!out.stderr.is_empty());
        assert!(!dir.path().join(format!("{cmd}_summary.json")).exists());
    }
}

#[test]
fn io_failures_exit_3() {
    let dir = with_config("{}");
    assert_eq!(exit_code(dir.path(), &["optimize", "--config", "missing.json"]), 3);
    assert_eq!(
        exit_code(dir.path(), &["prepare", "--config", "run.json", "--summary", "no/such/dir/s.json"]),
        3
    );
}

#[test]
fn thread_variable_is_validated_and_inert() {
    let dir = with_config(r#"{"noise": {"n_atoms": 10000, "n_runs": 500}}"#);
    let run = |threads: &str, name: &str| {
        Command::new(env!("CARGO_BIN_EXE_gravchan"))
            .args(["noise", "--config", "run.json", "--summary", name, "--out", "n.csv"])
            .current_dir(dir.path())
            .env("GRAVCHAN_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("1", "one.json").status.success());
    let serial = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
    assert!(run("0", "auto.json").status.success());
    let parallel = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
    assert_eq!(serial, parallel);
    assert_eq!(run("many", "bad.json").status.code(), Some(2));
}

#[test]
fn noise_default_ratios_and_seed() {
    let dir = with_config(r#"{"noise": {"n_runs": 2000}}"#);
    assert_eq!(exit_code(dir.path(), &["noise", "--config", "run.json", "--seed", "9"]), 0);
    let s = summary(dir.path(), "noise_summary.json");
    let r = &s["result"];
    assert_eq!(r["seed"], 9);
    assert_eq!(s["config"]["seed"], 9);
    assert!((r["shot_ratio"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-15);
    assert!((r["phase_ratio"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(r["mc_shot_no_channel"]["std_error"].as_f64().unwrap() > 0.0);
    assert_eq!(r["channel_reduces_noise"], true);

    let (header, rows) = read_csv(&dir.path().join("noise.csv"));
    assert_eq!(header, ["metric", "closed_form", "mc_estimate", "mc_std_error"]);
    let metrics: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert!(metrics.contains(&"shot_ratio") && metrics.contains(&"phase_ratio"));

    let first = std::fs::read(dir.path().join("noise.csv")).unwrap();
    assert_eq!(exit_code(dir.path(), &["noise", "--config", "run.json", "--seed", "10"]), 0);
    assert_ne!(first, std::fs::read(dir.path().join("noise.csv")).unwrap());
}

#[test]
fn optimize_reports_both_objectives() {
    let dir = with_config(r#"{"optimize": {"tolerance": 1e-4}}"#);
    assert_eq!(exit_code(dir.path(), &["optimize", "--config", "run.json"]), 0);
    let r = &summary(dir.path(), "optimize_summary.json")["result"];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((r["a_star_entropy"].as_f64().unwrap() - h).abs() < 1e-4);
    assert_eq!(r["a_star_png"].as_f64().unwrap(), h);
    assert!(r["entropy_iterations"].as_u64().unwrap() > 0);
    assert_eq!(r["png_iterations"], 0);
}

#[test]
fn prepare_bell_and_general() {
    let dir = with_config("{}");
    assert_eq!(exit_code(dir.path(), &["prepare", "--config", "run.json"]), 0);
    let r = &summary(dir.path(), "prepare_summary.json")["result"];
    assert_eq!(r["route"], "cavity");
    assert!((r["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r["cavity_residual"].as_f64().unwrap() < 1e-12);

    let dir = with_config(r#"{"channel": {"kind": "general", "a": 0.6, "b": 0.8}}"#);
    assert_eq!(exit_code(dir.path(), &["prepare", "--config", "run.json"]), 0);
    let r = &summary(dir.path(), "prepare_summary.json")["result"];
    assert!((r["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let amps = r["amplitudes"].as_array().unwrap();
    let find = |ket: &str| amps.iter().find(|a| a["ket"] == ket).unwrap()["re"].as_f64().unwrap();
    assert_eq!(find("ge;+0"), 0.6);
    assert_eq!(find("eg;+0"), 0.8);
}

#[test]
fn summary_echoes_effective_config() {
    let dir =
        with_config(r#"{"channel": {"kind": "general", "a": [0.6, 0], "b": 0.8}, "scan": {"points": 4}}"#);
    assert_eq!(
        exit_code(dir.path(), &["fringe", "--config", "run.json", "--seed", "3", "--out", "x.csv"]),
        0
    );
    let s = summary(dir.path(), "fringe_summary.json");
    let echoed: RunConfig = serde_json::from_value(s["config"].clone()).unwrap();
    let mut expected =
        RunConfig::from_json(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    expected.seed = 3;
    expected.output.csv = Some("x.csv".into());
    assert_eq!(echoed, expected);
}
