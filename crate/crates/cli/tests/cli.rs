use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn nqcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nqcs"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const SHORT_RR: &str = r#"
t_end = 0.3
seed = 4

[model]
name = "robot_arm_rr"

[[networks]]
masp = 0.01
mad = 0.0015
etm = { rho = 0.045 }

[[networks]]
masp = 0.01
mad = 0.0015
etm = { rho = 0.0333 }
"#;

#[test]
fn simulate_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "rr.toml", SHORT_RR);
    let out = tmp.path().join("out");
    let o = nqcs(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(header.starts_with("t,j,network,kind,gamma,triggered,norm_eta,norm_e,W_0,W_1,V\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let nets = summary["networks"].as_array().unwrap();
    assert_eq!(nets.len(), 2);
    for n in nets {
        assert_eq!(n["samples"], 30);
        assert!(n["triggered"].as_u64().unwrap() <= 30);
        assert_eq!(n["updates"], 29);
    }
    assert!(out.join("plot.csv").exists());
}

#[test]
fn seed_and_step_flags_override_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("zero_dynamics.toml");
    let run = |seed: &str, dir: &str| {
        let out = tmp.path().join(dir);
        let o = nqcs(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            seed,
            "--step",
            "2e-4",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("trace.csv")).unwrap()
    };
    let (a, b, c) = (run("9", "a"), run("9", "b"), run("10", "c"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().nth(2).unwrap().starts_with("0.0002,"));
}

#[test]
fn compare_reports_both_arms() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "rr.toml", SHORT_RR);
    let o = nqcs(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for n in report["networks"].as_array().unwrap() {
        assert_eq!(n["ttc_count"], 30);
        assert!(n["etc_count"].as_u64().unwrap() <= 30);
    }
    assert!(tmp.path().join("compare.json").exists());
}

#[test]
fn design_emits_table_or_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let tod = nqcs(&[
        "design",
        "--config",
        config("fig2_tod.toml").to_str().unwrap(),
        "--out-dir",
        dir,
    ]);
    assert!(tod.status.success(), "{}", String::from_utf8_lossy(&tod.stderr));
    let table: serde_json::Value = serde_json::from_slice(&tod.stdout).unwrap();
    for k in ["0", "1"] {
        let row = &table[k];
        let (t, d) = (row["T"].as_f64().unwrap(), row["Delta"].as_f64().unwrap());
        assert!(t > 0.0 && d >= 0.0 && d <= t);
        assert!(row["phi0_0"].is_number() && row["phi1_0"].is_number());
    }
    let rr = nqcs(&[
        "design",
        "--config",
        config("fig1_rr.toml").to_str().unwrap(),
        "--out-dir",
        dir,
    ]);
    assert_eq!(rr.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&rr.stderr).contains("infeasible"));
}

#[test]
fn design_tol_flag_changes_resolution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("fig2_tod.toml");
    let t_of = |tol: &str| {
        let o = nqcs(&[
            "design",
            "--config",
            cfg.to_str().unwrap(),
            "--tol",
            tol,
            "--out-dir",
            tmp.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["0"]["T"].as_f64().unwrap()
    };
    let (coarse, fine) = (t_of("1e-3"), t_of("1e-8"));
    assert!((coarse - fine).abs() <= 1e-3);
    assert_ne!(coarse, fine);
}

#[test]
fn config_errors_exit_2_with_field() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(
        tmp.path(),
        "bad.toml",
        &SHORT_RR.replacen("rho = 0.045", "rho = 0.5", 1),
    );
    let o = nqcs(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("networks[0].etm.rho"));

    let missing = nqcs(&[
        "simulate",
        "--config",
        tmp.path().join("nope.toml").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));

    let step = nqcs(&[
        "simulate",
        "--config",
        config("fig1_rr.toml").to_str().unwrap(),
        "--step",
        "0.01",
    ]);
    assert_eq!(step.status.code(), Some(2));
}

#[test]
fn validate_accepts_shipped_configs() {
    for name in [
        "fig1_rr.toml",
        "fig2_tod.toml",
        "zero_dynamics.toml",
        "fig1_rr.json",
    ] {
        let o = nqcs(&["validate", "--config", config(name).to_str().unwrap()]);
        assert!(
            o.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn non_finite_model_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SHORT_RR.replacen(
        "name = \"robot_arm_rr\"",
        "name = \"robot_arm_rr\"\nc = [1e-320, 4.0]",
        1,
    );
    let cfg = write(tmp.path(), "bad_c.toml", &text);
    let o = nqcs(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn diverging_run_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SHORT_RR.replacen(
        "name = \"robot_arm_rr\"",
        "name = \"robot_arm_rr\"\ncoupling = [[1e200, 0.0], [-1e200, 0.0]]",
        1,
    );
    let cfg = write(tmp.path(), "div.toml", &text);
    let o = nqcs(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
