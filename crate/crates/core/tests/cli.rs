use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn topcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = topcorr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_str(&run_ok(&all)).unwrap()
}

fn p(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn fixtures_command_reproduces_shipped_files() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["fixtures", dir.path().to_str().unwrap()]);
    let mut n = 0;
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let fresh = std::fs::read_to_string(&path).unwrap();
        let shipped = std::fs::read_to_string(fixture(&name)).unwrap();
        assert_eq!(fresh, shipped, "{name}");
        n += 1;
    }
    assert_eq!(n, 12);
}

#[test]
fn validate_accepts_fixtures_and_rejects_bad_files() {
    for name in ["D1.json", "D1plus.json", "SWAP2.json", "DKFLIP_E.json", "CIRCLE_F.json"] {
        assert_eq!(json(&["validate", &p(name)])["valid"], true);
    }
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, r#"{"base": {"vertices": ["a"]}}"#).unwrap();
    assert_eq!(topcorr(&["validate", broken.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(topcorr(&["validate", "/nonexistent.json"]).status.code(), Some(2));

    let mut g: Value = serde_json::from_str(&std::fs::read_to_string(fixture("D1.json")).unwrap()).unwrap();
    g["r"]["vertex_images"]["e1"] = Value::String("zzz".into());
    std::fs::write(&broken, g.to_string()).unwrap();
    let out = topcorr(&["validate", broken.to_str().unwrap()]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn conjugacy_verdicts() {
    let d1 = p("D1.json");
    let doc = json(&["conjugacy", &d1, &p("D1plus.json")]);
    assert!(doc["verdict"].as_str().unwrap().starts_with("NotConjugate"));
    assert!(doc["certificate"].is_null());

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let doc = json(&["conjugacy", &d1, &d1, "--out", out.to_str().unwrap()]);
    assert_eq!(doc["verdict"], "Conjugate");
    let doc = json(&["conjugacy", &d1, &d1, "--certificate", out.to_str().unwrap()]);
    assert_eq!(doc["verdict"], "Conjugate");
    assert_eq!(doc["checks"]["passed"], true);

    let doc = json(&["conjugacy", &p("DKFLIP_E.json"), &p("DKFLIP_F.json"), "--certificate", &p("DKFLIP_cert.json")]);
    assert_eq!(doc["verdict"], "Conjugate");
    let out = topcorr(&["conjugacy", &p("DKFLIP_E.json"), &p("DKFLIP_F.json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cover_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cover.json");
    let doc = json(&[
        "cover",
        &p("DKFLIP_E.json"),
        &p("DKFLIP_F.json"),
        "--certificate",
        &p("DKFLIP_cert.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(doc["checks"]["passed"], true);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, doc["cover"]);
}

#[test]
fn equivalence_on_dkflip() {
    let args = [
        "equivalence",
        &p("DKFLIP_E.json"),
        &p("DKFLIP_F.json"),
        "--certificate",
        &p("DKFLIP_cert.json"),
        "--seed",
        "7",
    ];
    let text = run_ok(&args);
    assert!(text.contains("1 flip(s)") && text.contains("PASS"));
    let doc = json(&args);
    assert_eq!(doc["flips"], 1);
    let v = &doc["verification"];
    assert_eq!(v["seed"], 7);
    for key in ["isometry", "left_module", "right_module", "continuity"] {
        assert!(v[key].as_f64().unwrap() <= 1e-9, "{key}");
    }
}

#[test]
fn characters_nestrep_and_fock() {
    let doc = json(&["characters", &p("DKFLIP_E.json"), "--vertex", "1@1/2"]);
    assert_eq!(doc["n"], 2);
    assert_eq!(doc["samples"].as_array().unwrap().len(), 3);
    let doc = json(&["characters", &p("D1.json"), "--vertex", "b"]);
    assert_eq!(doc["n"], 0);
    assert_eq!(topcorr(&["characters", &p("D1.json"), "--vertex", "nope"]).status.code(), Some(3));

    let doc = json(&["nestrep", &p("D1.json"), "--pair", "b,a"]);
    assert_eq!(doc["n"], 1);
    let masked = &doc["reports"][1];
    assert_eq!(masked["diagonal"], true);
    assert_eq!(masked["vanishes_on_fiber"], true);
    assert_eq!(doc["reports"][0]["diagonal"], false);
    assert_ne!(topcorr(&["nestrep", &p("D1.json"), "--pair", "b,b"]).status.code(), Some(0));

    let doc = json(&["fock", &p("SWAP2.json"), "--depth", "2", "--element", "@p"]);
    let depths = doc["depths"].as_array().unwrap();
    assert_eq!(depths.len(), 3);
    assert_eq!(depths[2]["dimension"], 14);
    for d in depths {
        assert!((d["norm_lower_bound"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
