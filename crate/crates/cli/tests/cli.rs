use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn censfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_censfit"))
        .args(args)
        .output()
        .expect("spawn censfit")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_input_exits_2_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_file.csv");
    let out = dir.path().join("r.json");
    let o = censfit(&["fit", "--input", s(&missing), "--output", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(s(&missing)), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn simulate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = censfit(&["simulate", "--n", "1000", "--seed", "7", "--output", s(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    censfit(&["simulate", "--n", "1000", "--seed", "8", "--output", s(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

fn acceptance_rate(o: &Output) -> f64 {
    let text = stdout(o);
    let tail = text.split("acceptance rate ").nth(1).expect("rate in output");
    tail.trim_end().trim_end_matches(')').parse().unwrap()
}

#[test]
fn uncensored_truth_accepts_everything() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"truth": {"censored": false}}"#);
    let out = dir.path().join("s.csv");
    let o = censfit(&["simulate", "-c", s(&cfg), "--n", "500", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((acceptance_rate(&o) - 1.0).abs() < 1e-12);

    // a link so strong that w is 1 to machine precision
    let cfg = write_config(
        dir.path(),
        "strong.json",
        r#"{"link": {"noise_ref_dbm": -200}}"#,
    );
    let o = censfit(&["simulate", "-c", s(&cfg), "--n", "500", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((acceptance_rate(&o) - 1.0).abs() < 1e-12);
}

#[test]
fn invalid_truth_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"truth": {"r_s": -1}}"#);
    let out = dir.path().join("s.csv");
    let o = censfit(&["simulate", "-c", s(&cfg), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

fn report(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn default_simulation_fits_both_modes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    let o = censfit(&["simulate", "--n", "5000", "-o", s(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let rep = dir.path().join("r.json");
    let curves = dir.path().join("curves.csv");
    let o = censfit(&[
        "fit", "-i", s(&data), "-o", s(&rep), "--curves", s(&curves), "--mode", "both",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&rep);
    assert_eq!(r["schema"], 1);
    let fits = r["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    assert_eq!(fits[0]["mode"], "naive");
    assert_eq!(fits[1]["mode"], "biased");
    for f in fits {
        for key in ["K_dB", "r_s_dB", "r_0", "rmse", "iterations", "converged", "n_samples"] {
            assert!(!f[key].is_null(), "missing {key}");
        }
        assert_eq!(f["n_samples"], 5000);
    }
    let rmse = |i: usize| fits[i]["rmse"].as_f64().unwrap();
    assert!(rmse(1) < rmse(0), "biased {} naive {}", rmse(1), rmse(0));

    let text = fs::read_to_string(&curves).unwrap();
    let blocks: Vec<&str> = text.split("# mode=").filter(|b| !b.is_empty()).collect();
    assert_eq!(blocks.len(), 2);
    for block in blocks {
        let mut lines = block.lines();
        lines.next();
        assert_eq!(lines.next(), Some("r,ecdf,model_cdf,model_pdf"));
        let rows: Vec<Vec<f64>> = lines
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 512);
        assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] && w[0][2] <= w[1][2]));
        assert_eq!(rows[511][1], 1.0);
    }
}

#[test]
fn naive_fit_recovers_uncensored_truth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"truth": {"k_db": 3, "r_s": 1, "r_0": 0, "amp_ref_db": 0, "censored": false}}"#,
    );
    let data = dir.path().join("s.csv");
    let o = censfit(&["simulate", "-c", s(&cfg), "--n", "20000", "--seed", "5", "-o", s(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rep = dir.path().join("r.json");
    let o = censfit(&["fit", "-i", s(&data), "-c", s(&cfg), "--mode", "naive", "-o", s(&rep)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = report(&rep);
    let fits = r["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 1);
    let k = fits[0]["K_dB"].as_f64().unwrap();
    assert!((k - 3.0).abs() <= 1.5, "K_dB {k}");
}

#[test]
fn reference_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    censfit(&["simulate", "--n", "200", "-o", s(&data)]);
    let cfg = write_config(dir.path(), "c.json", r#"{"calibration": {"sensitivity_dbm": -100}}"#);
    let rep = dir.path().join("r.json");
    let o = censfit(&["fit", "-i", s(&data), "-c", s(&cfg), "-o", s(&rep)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!rep.exists());
}

#[test]
fn failed_commit_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.csv");
    censfit(&["simulate", "--n", "300", "-o", s(&data)]);
    let rep = dir.path().join("r.json");
    let curves = dir.path().join("missing_dir").join("c.csv");
    let o = censfit(&["fit", "-i", s(&data), "-o", s(&rep), "--curves", s(&curves)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!rep.exists());
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

fn bias_rows(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && *l != "rss_db,w")
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn bias_curve_at_sensitivity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"packet": {"payload_bytes": 20}}"#);
    let out = dir.path().join("w.csv");
    let o = censfit(&[
        "bias-curve", "-c", s(&cfg), "--from", "-10", "--to", "30", "--step", "0.25", "-o", s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# calibration: rss_db=0 target_psr=0.2"));
    let rows = bias_rows(&text);
    assert_eq!(rows.len(), 161);
    let at_s = rows.iter().find(|r| r.0 == 0.0).unwrap();
    assert!((at_s.1 - 0.2).abs() < 1e-6, "w(S) = {}", at_s.1);
    assert!(rows.windows(2).all(|w| w[0].1 <= w[1].1));
    assert!(rows.last().unwrap().1 > 1.0 - 1e-12);
}

#[test]
fn bias_curve_default_packet_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let o = censfit(&["bias-curve", "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = bias_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 81);
    assert!(rows.windows(2).all(|w| w[0].1 <= w[1].1));
    // 50-byte packets fail more often than the 20-byte calibration packets
    let at_s = rows.iter().find(|r| r.0 == 0.0).unwrap();
    assert!(at_s.1 < 0.2);
}

#[test]
fn bias_curve_rejects_nonpositive_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    for step in ["0", "-0.5"] {
        let o = censfit(&["bias-curve", "--step", step, "-o", s(&out)]);
        assert_eq!(o.status.code(), Some(2), "step {step}");
        assert!(!out.exists());
    }
}
