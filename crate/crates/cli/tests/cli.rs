use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn vnlw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vnlw")).current_dir(dir).args(args).output().unwrap()
}

fn bundled(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn linear_run_completes_with_decreasing_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bundled("linear.json");
    cfg["output"]["directory"] = "out".into();
    let out = vnlw(tmp.path(), &["simulate", &write_config(tmp.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,E,H1,Lp1,quadratic,potential");
    let quad: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert!(quad.len() >= 20);
    assert!(quad.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn manifest_hashes_match_and_reruns_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bundled("svnlw_p3.json");
    cfg["time"]["T_final"] = 0.5.into();
    let mut hashes = Vec::new();
    for run in ["a", "b"] {
        cfg["output"]["directory"] = run.into();
        let out = vnlw(tmp.path(), &["simulate", &write_config(tmp.path(), &cfg)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let dir = tmp.path().join(run);
        let m = manifest(&dir);
        assert_eq!(m["status"], "completed");
        let files = m["files"].as_array().unwrap();
        assert!(files.iter().any(|f| f["path"] == "energy.csv"));
        assert!(files.iter().any(|f| f["path"].as_str().unwrap().ends_with(".bin")));
        for f in files {
            let bytes = std::fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
            assert_eq!(f["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
        }
        // The config echo names its own directory, so compare everything else.
        let h: Vec<(String, String)> = files
            .iter()
            .filter(|f| f["path"] != "config.json")
            .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
            .collect();
        hashes.push(h);
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn focusing_blowup_exits_three_with_overflow_time() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bundled("focusing_overflow.json");
    cfg["output"]["directory"] = "out".into();
    let out = vnlw(tmp.path(), &["simulate", &write_config(tmp.path(), &cfg)]);
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(&tmp.path().join("out"));
    assert_eq!(m["status"], "norm_overflow");
    let t = m["overflow"][0].as_f64().unwrap();
    assert!(t > 0.0 && t < 2.0);
    assert!(m["overflow"][1].as_f64().unwrap() > 1e4);
}

#[test]
fn invalid_configs_exit_64_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, "{\n  \"grid\": { \"N\": 32 },\n  \"dynamics\": { \"p\": 3, \"sign\": \"sideways\", \"forcing\": \"none\" }\n}").unwrap();
    let out = vnlw(tmp.path(), &["simulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let mut cfg = bundled("linear.json");
    cfg["grid"]["N"] = 31.into();
    assert_eq!(vnlw(tmp.path(), &["simulate", &write_config(tmp.path(), &cfg)]).status.code(), Some(64));
    let mut cfg = bundled("linear.json");
    cfg["dynamics"]["p"] = 1.0.into();
    assert_eq!(vnlw(tmp.path(), &["simulate", &write_config(tmp.path(), &cfg)]).status.code(), Some(64));
    assert_eq!(vnlw(tmp.path(), &["simulate", "missing.json"]).status.code(), Some(64));
}

#[test]
fn verify_exit_codes_and_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vnlw(tmp.path(), &["verify", "admissible", "--q", "4", "--r", "4", "--s", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reports/admissible/report.json")).unwrap()).unwrap();
    assert_eq!(rep["pass"], false);
    assert!((rep["estimates"]["residual"].as_f64().unwrap() - (-0.25)).abs() < 1e-15);

    assert_eq!(vnlw(tmp.path(), &["verify", "admissible", "--q", "3", "--r", "3"]).status.code(), Some(0));
    assert_eq!(vnlw(tmp.path(), &["verify", "no-such-thing"]).status.code(), Some(64));
    assert_eq!(vnlw(tmp.path(), &["verify", "admissible", "--bogus", "1"]).status.code(), Some(64));
    assert_eq!(vnlw(tmp.path(), &["verify", "admissible", "--q"]).status.code(), Some(64));

    let out = vnlw(tmp.path(), &["verify", "variance-exponent", "--mode", "oracle", "--n", "64", "--band-hi", "32", "--out", "v"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(tmp.path().join("v/variance-exponent.csv")).unwrap();
    assert!(csv.starts_with("bracket,variance\n") && csv.lines().count() > 10);
}

#[test]
fn exponents_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vnlw(tmp.path(), &["exponents", "--p", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let e: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(e["s_crit"], 0.5);
    assert_eq!(e["alpha_bound"], 0.0);
    let e: Value = serde_json::from_slice(&vnlw(tmp.path(), &["exponents", "--p", "3", "--json"]).stdout).unwrap();
    assert_eq!(e["alpha_bound"], 0.5);
    let table = vnlw(tmp.path(), &["exponents", "--p", "7"]);
    assert!(String::from_utf8_lossy(&table.stdout).contains("β_p           2"));
    assert_eq!(vnlw(tmp.path(), &["exponents", "--p", "1.0"]).status.code(), Some(64));
}

#[test]
fn thread_cap_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_vnlw"))
            .current_dir(tmp.path())
            .env("VNLW_THREADS", v)
            .args(["exponents", "--p", "3", "--json"])
            .output()
            .unwrap()
    };
    assert_eq!(run("1").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(64));
}
