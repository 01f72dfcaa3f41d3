use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use billiard_cli::output::sha256_hex;
use serde_json::Value;

fn billiard_thermo(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard-thermo"))
        .args(args)
        .env("BILLIARD_THERMO_CACHE", cache)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const CIRCLE_SINGLE: &str = r#"{
  "experiment": "classical",
  "shape": { "kind": "circle", "R": 1.0 },
  "classical": { "mode": "single", "n_collisions": 5000, "initial": { "x": 0.3, "y": 0.1, "vx": 1.2, "vy": 1.6 } }
}"#;

#[test]
fn classical_run_writes_outputs_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", CIRCLE_SINGLE);
    let out = tmp.path().join("out");
    let o = billiard_thermo(
        &[
            "classical",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let summary = json(&out.join("summary.json"));
    assert!((summary["PS_over_kBT"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let csv = fs::read_to_string(out.join("collisions.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,wall_id,pn"));
    assert_eq!(csv.lines().count(), 5001);

    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["experiment"], "classical");
    assert_eq!(manifest["degraded"], false);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    for f in outputs {
        let bytes = fs::read(out.join(f["file"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn seed_override_and_bitwise_repeat() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
      "experiment": "classical",
      "shape": { "kind": "stadium_quarter", "Ls": 1.0, "R": 1.0 },
      "classical": { "mode": "ensemble", "n_collisions": 300, "n_samples": 64 },
      "seed": 1
    }"#;
    let cfg = write_config(tmp.path(), "e.json", body);
    let run = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        let o = billiard_thermo(
            &[
                "classical",
                "--config",
                &cfg,
                "--out",
                out.to_str().unwrap(),
                "--seed",
                seed,
            ],
            tmp.path(),
        );
        assert_eq!(o.status.code(), Some(0));
        (
            fs::read(out.join("ensemble.csv")).unwrap(),
            fs::read(out.join("manifest.json")).unwrap(),
        )
    };
    let a = run("a", "5");
    let b = run("b", "5");
    let c = run("c", "6");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn eig_scan_header() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "r.json",
        r#"{"experiment":"eig-scan","shape":{"kind":"rectangle","Lx":2.0,"Ly":1.0},"states":{"count":12}}"#,
    );
    let out = tmp.path().join("out");
    let o = billiard_thermo(
        &["eig-scan", "--config", &cfg, "--out", out.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("eig_scan.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("index,label,k,E,PS,P2S,rel_dev,rel_dev2")
    );
    assert_eq!(csv.lines().count(), 13);
    assert!(fs::read_to_string(out.join("eig_scan.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", CIRCLE_SINGLE);
    let out = tmp.path().join("out");
    let o = billiard_thermo(
        &["eig-scan", "--config", &cfg, "--out", out.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config is for classical"));

    let bad = write_config(
        tmp.path(),
        "bad.json",
        &CIRCLE_SINGLE.replacen("\"shape\"", "\"colour\": 1, \"shape\"", 1),
    );
    let o = billiard_thermo(
        &[
            "classical",
            "--config",
            &bad,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));

    let lt = write_config(
        tmp.path(),
        "lt.json",
        r#"{"experiment":"local-temp","shape":{"kind":"circle","R":1.0},
            "solver":{"h":0.0625,"count":4},"local_temp":{"state":{"index":9}}}"#,
    );
    let o = billiard_thermo(
        &[
            "local-temp",
            "--config",
            &lt,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of range"));
}

#[test]
fn short_expansion_is_an_error_or_degraded() {
    let tmp = tempfile::tempdir().unwrap();
    let body = |accept: bool| {
        format!(
            r#"{{"experiment":"cs-evolve","shape":{{"kind":"rectangle","Lx":1.5,"Ly":1.0}},
                "coherent":{{"Qx":0.7,"Qy":0.5,"Px":8.0,"Py":2.0,"width":0.1}},
                "scan":{{"Qx":0.7,"Qy":0.5,"magnitudes":[1.0],"basis_e_max":150.0}},
                "dynamics":{{"accept_degraded":{accept},"horizon_tau":40}}}}"#
        )
    };
    let out = tmp.path().join("out");
    let strict = write_config(tmp.path(), "s.json", &body(false));
    let o = billiard_thermo(
        &[
            "cs-evolve",
            "--config",
            &strict,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("captured"));

    let lenient = write_config(tmp.path(), "l.json", &body(true));
    let o = billiard_thermo(
        &[
            "cs-evolve",
            "--config",
            &lenient,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["expansion_degraded"], true);
    assert!(summary["captured_norm"].as_f64().unwrap() < 0.999);
    let csv = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("t_over_tau,PS,P2S,PS_diag,P2S_diag")
    );
}

#[test]
fn local_temp_rectangle_integrates_to_energy() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "lt.json",
        r#"{"experiment":"local-temp","shape":{"kind":"rectangle","Lx":1.5,"Ly":1.0},
            "local_temp":{"state":{"nx":2,"ny":3},"raster":150}}"#,
    );
    let out = tmp.path().join("out");
    let o = billiard_thermo(
        &[
            "local-temp",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let s = json(&out.join("summary.json"));
    assert!(s["integral_rel_err"].as_f64().unwrap() < 1e-3);
    let csv = fs::read_to_string(out.join("local_temp.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,value,normalized"));
}
