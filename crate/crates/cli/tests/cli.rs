use serde_json::{json, Value};
use std::path::Path;
use std::process::{Command, Output};

fn nodal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal")).args(args).current_dir(dir).env_remove("NODAL_WORKERS").output().unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn condition_battery() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (json!({"kind": "sphere", "radius": 1, "dim": 2}), "pass", "no_atoms", "pass", "satisfied_by_barrier", 0),
        (json!({"kind": "cube", "halfwidth": 1, "dim": 2}), "pass", "no_atoms", "pass", "satisfied_by_interior_point", 0),
        (json!({"kind": "atoms", "points": [[1, 0]], "weights": [1]}), "pass", "has_atoms", "fail", "inconclusive", 2),
        (json!({"kind": "gaussian", "scale": 1, "dim": 2}), "pass", "no_atoms", "pass", "satisfied_by_interior_point", 0),
    ];
    for (i, (m, r1, r2, r3, r4, code)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("m{i}.json"), m);
        let o = nodal(&["check-spectrum", &cfg], dir.path());
        assert_eq!(o.status.code(), Some(*code), "{m}");
        let v = &stdout_json(&o)["result"]["verdicts"];
        assert_eq!((v["rho1"].as_str(), v["rho2"]["verdict"].as_str(), v["rho3"].as_str(), v["rho4"].as_str()), (Some(*r1), Some(*r2), Some(*r3), Some(*r4)), "{m}");
    }
    // the Gaussian density has 0 in its support
    let cfg = write(dir.path(), "m3.json", &cases[3].0);
    let w = &stdout_json(&nodal(&["check-spectrum", &cfg], dir.path()))["result"]["report"]["rho4"]["witness"];
    assert_eq!(w["point"], json!([0.0, 0.0]));
}

#[test]
fn sample_file_size_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", &json!({"ensemble": {"kind": "trigonometric", "degree": 20, "dim": 2}, "grid": {"torus": 512}, "seed": 3}));
    let out = dir.path().join("out");
    let run = |seed: &str| {
        let o = nodal(&["--out", out.to_str().unwrap(), "--seed", seed, "sample", &cfg], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        stdout_json(&o)["result"].clone()
    };
    let a = run("3");
    let header = 16;
    assert_eq!(a["bytes"].as_u64().unwrap(), header + 512 * 512 * 3 * 8);
    assert_eq!(std::fs::metadata(out.join("field.bin")).unwrap().len(), a["bytes"].as_u64().unwrap());
    assert!(out.join("field.json").exists() && out.join("sample.json").exists());
    assert_eq!(run("3")["sha256"], a["sha256"]);
    assert_ne!(run("4")["sha256"], a["sha256"]);
}

#[test]
fn config_hash_ignores_layout() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"kind":"sphere","radius":1,"dim":2}"#).unwrap();
    std::fs::write(&b, "{\n  \"dim\": 2,\n  \"radius\": 1.0,\n  \"kind\": \"sphere\"\n}").unwrap();
    let h = |p: &Path| stdout_json(&nodal(&["check-spectrum", p.to_str().unwrap()], dir.path()))["config_hash"].clone();
    let (ha, hb) = (h(&a), h(&b));
    assert_eq!(ha.as_str().unwrap().len(), 64);
    assert_eq!(ha, hb);
    std::fs::write(&b, r#"{"kind":"sphere","radius":2,"dim":2}"#).unwrap();
    assert_ne!(ha, h(&b));
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &json!({"ensemble": {"kind": "trigonometric", "degree": 0, "dim": 2}, "grid": {"torus": 64}}));
    assert_eq!(nodal(&["sample", &bad], dir.path()).status.code(), Some(64));
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{ not json").unwrap();
    assert_eq!(nodal(&["census", junk.to_str().unwrap()], dir.path()).status.code(), Some(64));
    assert_eq!(nodal(&["no-such-command"], dir.path()).status.code(), Some(64));
    assert_eq!(nodal(&["--help"], dir.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_nodal")).args(["check-spectrum", &bad]).env("NODAL_WORKERS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn kostlan_degree_one_and_identity_transform() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let k = write(dir.path(), "k.json", &json!({"degrees": [1], "samples": 5}));
    let o = nodal(&["--out", out.to_str().unwrap(), "kostlan-total", &k], dir.path());
    assert!(o.status.success());
    let row = &stdout_json(&o)["result"]["rows"][0];
    assert_eq!((row["min"].as_u64(), row["max"].as_u64()), (Some(1), Some(1)));
    assert!(out.join("kostlan_total.csv").exists());

    let d = write(
        dir.path(),
        "d.json",
        &json!({"measure": {"kind": "sphere", "radius": 1, "dim": 2}, "matrix": [[1, 0], [0, 1]], "radius": 5, "samples": 3, "spacing": 0.05}),
    );
    let o = nodal(&["det-scaling", &d], dir.path());
    assert!(o.status.success());
    assert!((stdout_json(&o)["result"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn census_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let c = write(
        dir.path(),
        "c.json",
        &json!({"draw": {"ensemble": {"kind": "trigonometric", "degree": 8, "dim": 2}, "grid": {"halfwidth": 3, "spacing": 0.02}}, "seed": 1, "radii": [2.5], "balls": [{"center": [0, 0], "r": 1}]}),
    );
    let o = nodal(&["--out", out.to_str().unwrap(), "census", "--dump-labels", &c], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &stdout_json(&o)["result"];
    assert!(r["zero_components"].as_u64().unwrap() > 0);
    assert!(r["certified"].is_boolean());
    let ball = &r["balls"][0];
    assert!(ball["n"].as_u64() <= ball["n_star"].as_u64());
    assert!(out.join("labels.bin").exists() && out.join("census.json").exists());
}

#[test]
fn estimate_nu_writes_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let n = write(
        dir.path(),
        "nu.json",
        &json!({"ensemble": {"kind": "stationary", "measure": {"kind": "cube", "halfwidth": 1, "dim": 1}, "n_modes": 512}, "radii": [5, 10], "ball_radii": [1, 2], "samples": 6, "spacing": 0.02, "seed": 5}),
    );
    let o = nodal(&["--out", out.to_str().unwrap(), "estimate-nu", &n], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("estimate_nu.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("R,nu_hat,stderr,bracket_low,bracket_high,certified_fraction"));
    assert_eq!(lines.count(), 2);
    // identical runs give byte-identical results
    let again = nodal(&["estimate-nu", &n], dir.path());
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn kernel_convergence_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let k = write(dir.path(), "kc.json", &json!({"ensemble": {"kind": "trigonometric", "degree": 10, "dim": 2}, "x": [0, 0], "l_sequence": [10, 40, 160]}));
    let o = nodal(&["kernel-converge", &k], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["result"]["strictly_decreasing"], json!(true));
}
