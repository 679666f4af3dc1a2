use std::path::PathBuf;
use std::process::{Command, Output};

use gme_core::states::{isotropic_ghz, xform_to_dense};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gme-lab"))
        .args(args)
        .env_remove("GME_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("gme-lab-{}-{name}", std::process::id()))
}

#[test]
fn thresholds_table() {
    let out = run(&["thresholds", "--n", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("N,k,p_threshold,kind\n"));
    assert!(text.contains("3,1,0.428571428571,single_copy"));
    assert!(text.contains("3,2,0.302169479252,k_copy"));
    assert!(text.contains("3,,0.2,partition_separability"));
}

#[test]
fn empty_k_range_is_a_config_error() {
    let out = run(&["thresholds", "--kmax", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn concurrence_at_half() {
    let out = run(&["concurrence", "--n", "3", "--p-start", "0.5", "--p-stop", "0.5", "--p-steps", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "p,c_gm,is_gme\n0.5,0.125,true\n");
}

#[test]
fn decomposition_rejects_other_n() {
    let out = run(&["verify-decomposition", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decomposition_json_report() {
    let out = run(&[
        "--format", "json", "verify-decomposition", "--p-start", "0.25", "--p-stop", "0.25", "--p-steps", "1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    let report = &v[0];
    assert_eq!(report["p"], 0.25);
    assert_eq!(report["valid"], true);
    assert!(report["residual_max"].as_f64().unwrap() <= 1e-10);
    assert!(report["gamma1_correction_applied"].as_str().unwrap().contains("Gamma1"));
}

#[test]
fn triangle_scan_brackets_boundary() {
    let out = run(&["witness-scan", "--mode", "triangle", "--y-steps", "9"]);
    assert!(out.status.success());
    let rows: Vec<(f64, bool)> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[5] == "true")
        })
        .collect();
    let boundary = 2f64.sqrt() - 1.0;
    for (y, detected) in rows {
        assert_eq!(detected, y < boundary, "y = {y}");
    }
}

#[test]
fn wedge_scan_runs() {
    let out = run(&["--format", "json", "witness-scan", "--mode", "wedge", "--y-steps", "3"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn locc_demo_activates() {
    let out = run(&["locc-demo"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("success probability: 0.037037037037"));
    assert!(text.lines().last().unwrap().starts_with("GME activated: witness = -"));
}

#[test]
fn locc_demo_outside_detection_region() {
    let out = run(&["locc-demo", "--y", "0.5", "--z", "0.5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("GME not detected"));
}

#[test]
fn malformed_probabilities() {
    for probs in ["0.5,0.6", "0.5,0.6,0", "a,b,c"] {
        let out = run(&["locc-demo", "--probs", probs]);
        assert_eq!(out.status.code(), Some(2), "--probs {probs}");
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["witness-scan", "--mode", "triangle", "--y-steps", "5"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ppt_scan_on_state_file() {
    let path = temp_path("state.json");
    let rho = xform_to_dense(&isotropic_ghz(3, 0.5).unwrap());
    std::fs::write(&path, rho.to_json()).unwrap();
    let out = run(&["ppt-scan", "--state", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("cut,pt_min_eig,ppt\n"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn ppt_scan_grid() {
    let out = run(&["ppt-scan", "--n", "3", "--p-start", "0.1", "--p-stop", "0.3", "--p-steps", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("3,0.1,1|23,0.0625,0.0625,0.2,true"));
    assert!(text.lines().filter(|l| l.starts_with("3,0.3,")).all(|l| l.ends_with(",false")));
}

#[test]
fn out_flag_writes_file() {
    let path = temp_path("thresholds.csv");
    let out = run(&["--out", path.to_str().unwrap(), "thresholds"]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(written.contains("3,1,0.428571428571,single_copy"));
}

#[test]
fn bad_thread_count() {
    let out = Command::new(env!("CARGO_BIN_EXE_gme-lab"))
        .arg("thresholds")
        .env("GME_LAB_THREADS", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
