use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_casimir-speckle"));
    c.env_remove("CASIMIR_SPECKLE_CACHE").env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn material_reports() {
    let gold = run(&["material", "gold", "--json"]);
    assert!(gold.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&gold)).unwrap();
    let rms = v["rms_scale"].as_f64().unwrap();
    assert!((rms / 3.4e-5 - 1.0).abs() < 0.05, "{rms}");
    let nichrome: serde_json::Value = serde_json::from_str(&stdout(&run(&["material", "nichrome", "--json"]))).unwrap();
    let ratio = nichrome["prefactor"].as_f64().unwrap() / v["prefactor"].as_f64().unwrap();
    assert!((11.0..=12.0).contains(&ratio), "{ratio}");
    assert!(stdout(&run(&["material"])).contains("rms scale"));
    assert_eq!(run(&["material", "unobtainium"]).status.code(), Some(64));
}

#[test]
fn dissipationless_material_has_zero_prefactor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"material": {"plasma_frequency": 1.37e16, "relaxation_rate": 0.0, "model": "plasma"}}"#,
    );
    let o = run(&["--config", &cfg, "material", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["prefactor"].as_f64(), Some(0.0));
    assert!(v["note"].as_str().unwrap().contains("vanishes"));
}

#[test]
fn mean_asymptote_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--z", "100", "--out", out, "mean"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: f64 = column(&stdout(&o), "asymptote_ratio")[0].parse().unwrap();
    assert!((r - 1.0).abs() < 0.02, "{r}");
    assert_eq!(std::fs::read_to_string(dir.path().join("mean.csv")).unwrap(), stdout(&o));

    let cfg = write_config(dir.path(), r#"{"lambda_gamma": 100, "lambda_t": 1000}"#);
    let o = run(&["--config", &cfg, "--z", "10000", "--out", out, "mean"]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "asymptote")[0], "mean-thermal");
    let r: f64 = column(&stdout(&o), "asymptote_ratio")[0].parse().unwrap();
    assert!((r - 1.0).abs() < 0.01, "{r}");
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["--out", out, "mean"]).status.code(), Some(64));
    let empty = write_config(dir.path(), r#"{"z_grid": {"values": []}}"#);
    assert_eq!(run(&["--config", &empty, "--out", out, "fvar"]).status.code(), Some(64));
    assert_eq!(run(&["--z", "3,2", "--out", out, "fvar"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--model", "jellium", "material"]).status.code(), Some(64));
    assert_eq!(run(&["--kernel-variant", "c", "material"]).status.code(), Some(64));
    assert_eq!(run(&["--samples", "10", "--z", "1", "--out", out, "fvar"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "--criteria", "99"]).status.code(), Some(64));
    assert_eq!(run(&["asymptote", "f-sideways", "--z", "1"]).status.code(), Some(64));
    assert!(run(&["--help"]).status.success());
}

fn fvar(out: &Path, extra: &[&str]) -> Output {
    let cfg = write_config(out, r#"{"lambda_gamma": 100, "z_grid": {"min": 3, "max": 30, "points": 3}}"#);
    let mut args = vec!["--config", cfg.as_str(), "--samples", "10000", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.push("fvar");
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    o
}

#[test]
fn fvar_is_bit_identical_across_fresh_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    fvar(a.path(), &[]);
    fvar(b.path(), &[]);
    let ca = std::fs::read(a.path().join("fvar.csv")).unwrap();
    let cb = std::fs::read(b.path().join("fvar.csv")).unwrap();
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("z_over_lambda_p,F,F_err,n_samples,regime,U_mean,prefactor,fingerprint,"));
    let fps = column(&text, "fingerprint");
    assert_eq!(fps.len(), 3);
    assert!(fps.iter().all(|f| f == &fps[0]));
    assert!(a.path().join("effective_config.json").is_file());
}

#[test]
fn fvar_resumes_from_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let first = fvar(dir.path(), &[]);
    assert!(stderr(&first).contains("3 computed, 0 cached"), "{}", stderr(&first));
    let again = fvar(dir.path(), &[]);
    assert!(stderr(&again).contains("0 computed, 3 cached"), "{}", stderr(&again));
    assert_eq!(stdout(&first), stdout(&again));
    let reseeded = fvar(dir.path(), &["--seed", "99"]);
    assert!(stderr(&reseeded).contains("3 computed, 0 cached"), "{}", stderr(&reseeded));
    let variant = fvar(dir.path(), &["--kernel-variant", "a"]);
    assert!(stderr(&variant).contains("3 computed, 0 cached"));
}

#[test]
fn cache_directory_from_environment() {
    let (out, cache) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = bin()
        .env("CASIMIR_SPECKLE_CACHE", cache.path())
        .args(["--z", "5", "--samples", "10000", "--out", out.path().to_str().unwrap(), "fvar"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_dir(cache.path()).unwrap().count(), 1);
    assert!(!out.path().join(".cache").exists());
}

#[test]
fn drude_and_plasma_sweeps_differ() {
    let (d, p) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let drude = stdout(&fvar(d.path(), &["--model", "drude"]));
    let plasma = stdout(&fvar(p.path(), &["--model", "plasma"]));
    assert_ne!(column(&drude, "fingerprint")[0], column(&plasma, "fingerprint")[0]);
    assert!(column(&plasma, "F").iter().all(|f| f.parse::<f64>().unwrap() > 0.0));
}

#[test]
fn calibration_mode_reports_a_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = write_config(dir.path(), r#"{"lambda_gamma": 100}"#);
    let o = run(&["--config", &cfg, "--z", "300,1000,3000", "--samples", "20000", "--out", out, "fvar"]);
    assert!(o.status.success());
    let csv = dir.path().join("fvar.csv");
    let o = run(&["--config", &cfg, "asymptote", "f-far", "--calibrate", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.3, "{ratio}");
    let o = run(&["--config", &cfg, "--z", "1,10", "--out", out, "asymptote", "f-intermediate"]);
    assert_eq!(column(&stdout(&o), "f-intermediate")[1], "8.00000000000e-9");
}

#[test]
fn verify_subset_writes_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--level", "smoke", "--criteria", "1,9", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["passed"], serde_json::Value::Bool(true));
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 2);
}
